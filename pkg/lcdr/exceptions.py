# Error taxonomy shared by every package. The CLI maps each class to an exit code.


class LcdrError(RuntimeError):
    exit_code = 1


class ConfigurationError(LcdrError, ValueError):
    exit_code = 2


class ParseError(LcdrError, ValueError):
    exit_code = 2

    def __init__(self, path, line_number, message):
        self.path = path
        self.line_number = line_number
        super().__init__("{}:{}: {}".format(path, line_number, message))


class SplitError(LcdrError):
    exit_code = 2


class EvaluationError(LcdrError):
    exit_code = 2


class CalibrationError(LcdrError):
    exit_code = 2


class NumericalError(LcdrError, ArithmeticError):
    exit_code = 3

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class OutputConflictError(LcdrError):
    exit_code = 4


def exit_code_for(error):
    if isinstance(error, LcdrError):
        return error.exit_code
    if isinstance(error, FileNotFoundError):
        return 2
    return 1
