"""Unit and config-text converters."""

import abc
import enum
import math
import typing

from .const import FLOAT_DIGITS

T = typing.TypeVar("T")
TEnum = typing.TypeVar("TEnum", bound=enum.Enum)

NEGATIVE_INFINITY = float("-inf")

AUTO = "auto"


class UnitConverter(metaclass=abc.ABCMeta):
    """Base converter between a user-facing unit and internal linear units."""

    @abc.abstractmethod
    def from_unit(self, val: float) -> float:
        """Convert a user-facing value to the internal equivalent."""
        raise NotImplementedError()

    @abc.abstractmethod
    def to_unit(self, val: float) -> float:
        """Convert an internal value to the user-facing equivalent."""
        raise NotImplementedError()


class DecibelConverter(UnitConverter):
    """Power ratio converter between dB and linear scale."""

    def from_unit(self, val: float) -> float:
        """Convert a dB value to the linear power ratio."""
        if val == NEGATIVE_INFINITY:
            return 0.0

        return 10.0 ** (val / 10.0)

    def to_unit(self, val: float) -> float:
        """Convert a linear power ratio to dB."""
        if val < 0.0:
            raise ValueError(f"Power ratio {val} is negative.")

        if val == 0.0:
            return NEGATIVE_INFINITY

        return 10.0 * math.log10(val)


class DegreeConverter(UnitConverter):
    """Angle converter between degrees and radians."""

    def from_unit(self, val: float) -> float:
        """Convert degrees to radians."""
        return math.radians(val)

    def to_unit(self, val: float) -> float:
        """Convert radians to degrees."""
        return math.degrees(val)


class TextConverter(typing.Generic[T], metaclass=abc.ABCMeta):
    """Base converter for config file values."""

    @abc.abstractmethod
    def from_text(self, val: str) -> T:
        """Convert config text to the T equivalent."""
        raise NotImplementedError()

    @abc.abstractmethod
    def to_text(self, val: T) -> str:
        """Convert a T value to config text."""
        raise NotImplementedError()


def format_float(val: float) -> str:
    """Format a float with the fixed number of significant digits."""
    return format(float(val), f".{FLOAT_DIGITS}g")


class IntConverter(TextConverter[int]):
    """Integer value converter."""

    def from_text(self, val: str) -> int:
        """Convert config text to an integer."""
        try:
            return int(val.strip())
        except ValueError:
            raise ValueError(f"'{val}' is not an integer.") from None

    def to_text(self, val: int) -> str:
        """Convert an integer to config text."""
        return str(int(val))


class FloatConverter(TextConverter[float]):
    """Real value converter."""

    def from_text(self, val: str) -> float:
        """Convert config text to a float."""
        try:
            return float(val.strip())
        except ValueError:
            raise ValueError(f"'{val}' is not a real number.") from None

    def to_text(self, val: float) -> str:
        """Convert a float to config text."""
        return format_float(val)


class ListConverter(TextConverter[tuple[T, ...]]):
    """Comma-separated list converter."""

    _item: TextConverter[T]

    def __init__(self, item: TextConverter[T]):
        """Initialize the list converter."""
        self._item = item

    @property
    def item(self) -> TextConverter[T]:
        """Get the converter used for each item."""
        return self._item

    def from_text(self, val: str) -> tuple[T, ...]:
        """Convert comma-separated config text to a tuple."""
        parts = [part for part in val.split(",") if part.strip() != ""]

        if len(parts) == 0:
            raise ValueError("Empty list.")

        return tuple(self._item.from_text(part) for part in parts)

    def to_text(self, val: tuple[T, ...]) -> str:
        """Convert a tuple to comma-separated config text."""
        return ",".join(self._item.to_text(item) for item in val)


class ChoiceConverter(TextConverter[TEnum]):
    """Enumerated option converter."""

    _choices: type[TEnum]

    def __init__(self, choices: type[TEnum]):
        """Initialize the option converter."""
        self._choices = choices

    @property
    def options(self) -> list[str]:
        """Get the accepted option strings."""
        return [choice.value for choice in self._choices]

    def from_text(self, val: str) -> TEnum:
        """Convert config text to the enumerated option."""
        try:
            return self._choices(val.strip())
        except ValueError:
            raise ValueError(
                f"'{val}' is not one of: {', '.join(self.options)}."
            ) from None

    def to_text(self, val: TEnum) -> str:
        """Convert an enumerated option to config text."""
        return val.value


class AutoConverter(TextConverter[T | None]):
    """Converter that maps the literal 'auto' to None."""

    _inner: TextConverter[T]

    def __init__(self, inner: TextConverter[T]):
        """Initialize the auto-able converter."""
        self._inner = inner

    def from_text(self, val: str) -> T | None:
        """Convert config text, treating 'auto' as None."""
        if val.strip().lower() == AUTO:
            return None

        return self._inner.from_text(val)

    def to_text(self, val: T | None) -> str:
        """Convert a value to config text, writing None as 'auto'."""
        if val is None:
            return AUTO

        return self._inner.to_text(val)


decibel_converter = DecibelConverter()
degree_converter = DegreeConverter()

int_converter = IntConverter()
float_converter = FloatConverter()
float_list_converter = ListConverter(float_converter)
int_list_converter = ListConverter(int_converter)
