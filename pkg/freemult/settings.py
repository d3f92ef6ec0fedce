"""
Settings for the freemult project.

Every value can be overridden from the environment or a ``.env`` file,
using the ``FREEMULT_`` prefix (e.g. ``FREEMULT_QUAD_EPSREL=1e-10``).
"""

from pathlib import Path
from decouple import config, Csv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Quadrature

QUAD_EPSREL = config('FREEMULT_QUAD_EPSREL', default=1e-12, cast=float)
QUAD_EPSABS = config('FREEMULT_QUAD_EPSABS', default=0.0, cast=float)
QUAD_LIMIT = config('FREEMULT_QUAD_LIMIT', default=200, cast=int)
# Relative error above which a quadrature result is rejected
QUAD_ACCEPT = config('FREEMULT_QUAD_ACCEPT', default=1e-8, cast=float)

# Moments above this are reported as infinite
INFINITE_MOMENT_THRESHOLD = config('FREEMULT_INFINITE_MOMENT', default=1e12, cast=float)
# Tail-function moments stop where the tail drops below this
TAIL_CUTOFF = config('FREEMULT_TAIL_CUTOFF', default=1e-14, cast=float)


# S-transform inversion

CHI_RTOL = config('FREEMULT_CHI_RTOL', default=1e-12, cast=float)
BRACKET_MAX_STEPS = config('FREEMULT_BRACKET_MAX_STEPS', default=200, cast=int)
MAX_DERIVATIVE_ORDER = 3


# Regular variation

DEFAULT_GRID = config('FREEMULT_DEFAULT_GRID', default='6:16:11')
SLOPE_DRIFT_THRESHOLD = config('FREEMULT_SLOPE_DRIFT', default=0.05, cast=float)
PI_LAMBDAS = config('FREEMULT_PI_LAMBDAS', default='2,4,8', cast=Csv(float))
PI_DRIFT_THRESHOLD = config('FREEMULT_PI_DRIFT', default=0.05, cast=float)
# Increment ratio (last/first) above which a derivative is called unbounded
GROWTH_RATIO = config('FREEMULT_GROWTH_RATIO', default=0.1, cast=float)
# Log-log slope of S above which S(-1/x) counts as slowly varying
SLOW_SLOPE = config('FREEMULT_SLOW_SLOPE', default=0.05, cast=float)


# Monte Carlo

MC_MATRIX_SIZE = config('FREEMULT_MC_N', default=512, cast=int)
MC_REPS = config('FREEMULT_MC_REPS', default=200, cast=int)
MC_HILL_K = config('FREEMULT_MC_HILL_K', default=1000, cast=int)
EIGEN_FLOOR = config('FREEMULT_EIGEN_FLOOR', default=1e-10, cast=float)


# Reports

REPORT_SCHEMA = 'freemult/1'
REPORT_FLOAT_FORMAT = '.12g'


# Logging

LOG_LEVEL = config('FREEMULT_LOG_LEVEL', default='WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'stransform': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
        },
        'freemult': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
        },
    },
}
