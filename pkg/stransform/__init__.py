"""
Numerical S-transforms and tail asymptotics for free multiplicative convolution.
"""

from .exceptions import FreeMultError, NotAvailable, ValidationError
from .free_mult import s_combine
from .id_laws import LevyPair, id_handle, id_tail_predict
from .measures import moment, pushforward_inverse, sample, symmetric_square, tail
from .regvar import LogPowerSV, TailAsymptotic, estimate_tail_from_s, predict_power_tail
from .transforms import closed_form_s, psi_eval, s_eval, s_transform

__all__ = [
    'FreeMultError', 'NotAvailable', 'ValidationError',
    'LevyPair', 'LogPowerSV', 'TailAsymptotic',
    'closed_form_s', 'estimate_tail_from_s', 'id_handle', 'id_tail_predict',
    'moment', 'predict_power_tail', 'psi_eval', 'pushforward_inverse', 's_combine',
    's_eval', 's_transform', 'sample', 'symmetric_square', 'tail',
]
