"""
Configuration management for gemm-splat
Centralized environment variables and render defaults
"""

import os

BASE_DIR = os.path.dirname(os.path.abspath(__file__))
DEFAULT_ENV_FILE = os.path.join(BASE_DIR, '.env')


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


def load_env_file(path: str = DEFAULT_ENV_FILE):
    """
    Load a .env file into the process environment.

    Variables already set in the environment take precedence.

    Returns:
        The path that was loaded, or None when the file is missing or
        python-dotenv is not installed
    """
    try:
        from dotenv import load_dotenv
    except ImportError:
        return None
    if not os.path.exists(path):
        return None
    load_dotenv(path)
    return path


class Config:
    """Renderer configuration from environment variables"""

    BASE_DIR = BASE_DIR

    @classmethod
    def load(cls) -> None:
        """
        (Re)read every setting from the environment.

        Runs once at import; the CLI calls it again after loading .env.

        Raises:
            ValueError: if a numeric variable does not parse
        """
        # Logging configuration
        cls.LOG_PATH = os.getenv('GEMM_SPLAT_LOG_PATH')
        cls.LOG_LEVEL = os.getenv('GEMM_SPLAT_LOG_LEVEL', 'INFO').upper()

        # Blending backend
        cls.BACKEND = os.getenv('GEMM_SPLAT_BACKEND', 'reference').lower()
        cls.PRECISION = os.getenv('GEMM_SPLAT_PRECISION', 'full').lower()

        # Tiling and batching
        cls.TILE_SIZE = int(os.getenv('GEMM_SPLAT_TILE_SIZE', '16'))
        cls.BATCH_SIZE = int(os.getenv('GEMM_SPLAT_BATCH_SIZE', '256'))
        cls.REFERENCE_PIXEL = os.getenv('GEMM_SPLAT_REFERENCE_PIXEL', 'top_left').lower()
        cls.SIGMA_EXTENT = float(os.getenv('GEMM_SPLAT_SIGMA_EXTENT', '3.33'))
        cls.MAX_DUPLICATES = int(os.getenv('GEMM_SPLAT_MAX_DUPLICATES', str(1 << 27)))

        # Compositing
        cls.EARLY_STOP_T = float(os.getenv('GEMM_SPLAT_EARLY_STOP_T', '1e-4'))
        cls.BACKGROUND = os.getenv('GEMM_SPLAT_BACKGROUND', '0,0,0')

        # Scheduling
        cls.WORKERS = int(os.getenv('GEMM_SPLAT_WORKERS', str(os.cpu_count() or 1)))
        cls.PREFETCH = _env_bool('GEMM_SPLAT_PREFETCH', 'true')

        # Comparison and benchmark defaults
        cls.PSNR_FLOOR = float(os.getenv('GEMM_SPLAT_PSNR_FLOOR', '45.0'))
        cls.BENCH_REPS = int(os.getenv('GEMM_SPLAT_BENCH_REPS', '10'))
        cls.BENCH_WARMUP = int(os.getenv('GEMM_SPLAT_BENCH_WARMUP', '2'))

    @classmethod
    def background_rgb(cls) -> tuple:
        """Parse BACKGROUND ("r,g,b") into a float triple"""
        return parse_rgb(cls.BACKGROUND)

    @classmethod
    def verify_settings(cls) -> bool:
        """Verify environment settings are usable before rendering"""
        from backend_config import BACKEND_TYPES, PRECISION_MODES, REFERENCE_PIXELS

        problems = []
        if cls.BACKEND not in BACKEND_TYPES:
            problems.append(f"GEMM_SPLAT_BACKEND={cls.BACKEND} (expected one of {', '.join(BACKEND_TYPES)})")
        if cls.PRECISION not in PRECISION_MODES:
            problems.append(f"GEMM_SPLAT_PRECISION={cls.PRECISION} (expected one of {', '.join(PRECISION_MODES)})")
        if cls.REFERENCE_PIXEL not in REFERENCE_PIXELS:
            problems.append(f"GEMM_SPLAT_REFERENCE_PIXEL={cls.REFERENCE_PIXEL}")
        if cls.TILE_SIZE < 1:
            problems.append(f"GEMM_SPLAT_TILE_SIZE={cls.TILE_SIZE} (must be >= 1)")
        if cls.BATCH_SIZE < 1:
            problems.append(f"GEMM_SPLAT_BATCH_SIZE={cls.BATCH_SIZE} (must be >= 1)")
        if cls.WORKERS < 1:
            problems.append(f"GEMM_SPLAT_WORKERS={cls.WORKERS} (must be >= 1)")
        if not 0.0 <= cls.EARLY_STOP_T < 1.0:
            problems.append(f"GEMM_SPLAT_EARLY_STOP_T={cls.EARLY_STOP_T} (must be in [0, 1))")
        try:
            cls.background_rgb()
        except ValueError:
            problems.append(f"GEMM_SPLAT_BACKGROUND={cls.BACKGROUND} (expected r,g,b)")

        if problems:
            error_msg = f"""
INVALID ENVIRONMENT SETTINGS:
{chr(10).join('   ' + p for p in problems)}

Fix them in .env or the system environment, e.g.:
   export GEMM_SPLAT_BACKEND=gemm
"""
            print(error_msg)
            return False

        return True

    @classmethod
    def log_startup_info(cls, logger) -> None:
        """Log effective configuration at startup"""
        logger.info("=== GEMM-SPLAT CONFIGURATION ===")
        logger.info(f"Base directory: {cls.BASE_DIR}")
        logger.info(f"Log path: {cls.LOG_PATH or '(console only)'}")
        logger.info(f"Backend: {cls.BACKEND} ({cls.PRECISION} precision)")
        logger.info(f"Tile size: {cls.TILE_SIZE}, batch size: {cls.BATCH_SIZE}")
        logger.info(f"Reference pixel: {cls.REFERENCE_PIXEL}")
        logger.info(f"Workers: {cls.WORKERS}, prefetch: {cls.PREFETCH}")
        logger.info(f"Early termination T: {cls.EARLY_STOP_T}")
        logger.info(f"Log level: {cls.LOG_LEVEL}")


def parse_rgb(text: str) -> tuple:
    """
    Parse an "r,g,b" string into a float triple.

    Raises:
        ValueError: if the string does not hold exactly three numbers
    """
    parts = [p.strip() for p in str(text).split(',')]
    if len(parts) != 3:
        raise ValueError(f"expected r,g,b, got '{text}'")
    return tuple(float(p) for p in parts)


Config.load()
