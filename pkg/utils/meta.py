from types import FunctionType

from exceptions import GeoContextException, InternalError
from utils.log import get_logger


class ExceptionHandlingMeta(type):
    """
    Metaclass that automatically wraps all public class methods with exception handling.

    Pipeline exceptions (GeoContextException and subclasses) pass through untouched.
    Any other exception is logged with its traceback and re-raised as InternalError,
    so callers only ever have to handle the pipeline hierarchy.
    """

    def __new__(cls, name: str, bases: tuple, dct: dict) -> type:
        """
        Creates a new class with wrapped methods.

        Args:
            name (str): Name of the class being created.
            bases (tuple): Tuple of base classes.
            dct (dict): Dictionary containing class attributes and methods.

        Returns:
            type: New class with wrapped methods.
        """
        logger = get_logger(name)

        def create_wrapper(original_method: FunctionType) -> FunctionType:
            """
            Creates a wrapper function for the original method.

            Args:
                original_method (FunctionType): Original method to wrap.

            Returns:
                FunctionType: Wrapped method with exception handling.
            """

            def wrapper(*args, **kwargs):
                try:
                    return original_method(*args, **kwargs)
                except GeoContextException:
                    raise
                except Exception as exc:
                    logger.error("An error has occurred in method %s:", original_method.__name__, exc_info=True)
                    raise InternalError(f"{original_method.__name__}: {type(exc).__name__}: {exc}") from exc

            wrapper.__name__ = original_method.__name__
            wrapper.__doc__ = original_method.__doc__
            return wrapper

        for attr_name, attr_value in dct.items():
            if isinstance(attr_value, FunctionType) and not attr_name.startswith("_"):
                dct[attr_name] = create_wrapper(attr_value)

        return super().__new__(cls, name, bases, dct)
