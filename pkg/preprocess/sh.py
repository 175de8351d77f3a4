"""
View-dependent color from real spherical harmonics (degree <= 3)
"""

import numpy as np

SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199
SH_C2 = (
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
)
SH_C3 = (
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.4453057213202769,
    -0.5900435899266435,
)

VIEW_DIR_TOL = 1e-5


def eval_colors(sh: np.ndarray, dirs: np.ndarray, degree: int = 3) -> np.ndarray:
    """
    Evaluate SH colors for many Gaussians.

    Args:
        sh: Coefficients (N, 16, 3), degree-0 term first
        dirs: Unit view directions (N, 3), camera toward Gaussian
        degree: Highest band to evaluate (0-3)

    Returns:
        (N, 3) colors, SH value + 0.5 clamped below at 0
    """
    result = SH_C0 * sh[:, 0]

    if degree >= 1:
        x, y, z = dirs[:, 0:1], dirs[:, 1:2], dirs[:, 2:3]
        result = (
            result
            - SH_C1 * y * sh[:, 1]
            + SH_C1 * z * sh[:, 2]
            - SH_C1 * x * sh[:, 3]
        )

        if degree >= 2:
            xx, yy, zz = x * x, y * y, z * z
            xy, yz, xz = x * y, y * z, x * z
            result = (
                result
                + SH_C2[0] * xy * sh[:, 4]
                + SH_C2[1] * yz * sh[:, 5]
                + SH_C2[2] * (2.0 * zz - xx - yy) * sh[:, 6]
                + SH_C2[3] * xz * sh[:, 7]
                + SH_C2[4] * (xx - yy) * sh[:, 8]
            )

            if degree >= 3:
                result = (
                    result
                    + SH_C3[0] * y * (3.0 * xx - yy) * sh[:, 9]
                    + SH_C3[1] * xy * z * sh[:, 10]
                    + SH_C3[2] * y * (4.0 * zz - xx - yy) * sh[:, 11]
                    + SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * sh[:, 12]
                    + SH_C3[4] * x * (4.0 * zz - xx - yy) * sh[:, 13]
                    + SH_C3[5] * z * (xx - yy) * sh[:, 14]
                    + SH_C3[6] * x * (xx - 3.0 * yy) * sh[:, 15]
                )

    return np.maximum(result + 0.5, 0.0)


def eval_color(g, view_dir) -> tuple:
    """
    Color of one Gaussian seen along `view_dir`.

    Raises:
        ValueError: if view_dir is not unit length within 1e-5
    """
    direction = np.asarray(view_dir, dtype=np.float64)
    if abs(np.linalg.norm(direction) - 1.0) > VIEW_DIR_TOL:
        raise ValueError("view_dir must be a unit vector")
    sh = np.asarray(g.sh_coeffs, dtype=np.float64)[None]
    rgb = eval_colors(sh, direction[None], degree=3)[0]
    return tuple(float(c) for c in rgb)
