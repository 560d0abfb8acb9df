from typing import Optional


class HopcryptError(ValueError):
    """Base class for every domain error raised by hopcrypt"""


class KeyLengthError(HopcryptError):
    def __init__(self, length: int):
        self.length = length
        super().__init__(
            f"Invalid key length {length} octets; valid lengths are 16, 24 or 32 octets"
        )


class BlockLengthError(HopcryptError):
    pass


class ScheduleMismatchError(HopcryptError):
    pass


class PaddingError(HopcryptError):
    pass


class TimerRangeError(HopcryptError):
    def __init__(self, message: str, nearest_prescaler: Optional[int] = None):
        self.nearest_prescaler = nearest_prescaler
        if nearest_prescaler is not None:
            message = f"{message}; nearest feasible prescaler is {nearest_prescaler}"
        else:
            message = f"{message}; no prescaler can represent this interval"
        super().__init__(message)


class CalibrationError(HopcryptError):
    pass


class TopologyError(HopcryptError):
    pass


class IntegrityError(HopcryptError):
    pass


class CorrectnessError(HopcryptError):
    """Raised when a benchmark round-trip does not reproduce its input"""


class HopCountError(HopcryptError):
    pass
