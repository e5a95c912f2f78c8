from histfn.functions import bank_deriv, bank_eval, context_to_functions, functions_to_context
from histfn.models import HistFnBank, PiecewiseLinearFn, fit

__all__ = [
    "HistFnBank",
    "PiecewiseLinearFn",
    "bank_deriv",
    "bank_eval",
    "context_to_functions",
    "fit",
    "functions_to_context",
]
