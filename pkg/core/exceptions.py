"""
Иерархия ошибок лаборатории.
Каждый класс знает свой код выхода, команда `zeno` переводит его в CommandError.
"""


class ZenoLabError(Exception):
    exit_code = 1


class MalformedInputError(ZenoLabError):
    exit_code = 2


class InvalidHamiltonianError(ZenoLabError):
    exit_code = 3


class OutOfDomainError(ZenoLabError):
    exit_code = 4


class StationaryStateError(OutOfDomainError):
    pass


class NonFiniteStateError(OutOfDomainError):
    pass


class InsufficientDataError(ZenoLabError):
    exit_code = 5


class NotZenoSystemError(ZenoLabError):
    exit_code = 6


class CorrespondenceError(ZenoLabError):
    pass
