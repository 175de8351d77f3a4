"""
Shared numba compilation options.

fastmath stays off: kernels must produce the same bits on every run and
for every worker count.
"""

JIT_OPTIONS = {
    'nopython': True,
    'nogil': True,
    'fastmath': False,
    'cache': False,
}
