"""
Absent-or-present values.

A rank that does not take part in an operation gets an absent result instead of
a sentinel, so should_equal checks pass vacuously on non-participants.
"""

from typing import Callable, Generic, TypeVar

T = TypeVar('T')
U = TypeVar('U')

_ABSENT = object()


class Maybe(Generic[T]):
    __slots__ = ('_value',)

    def __init__(self, value=_ABSENT):
        self._value = value

    @classmethod
    def of(cls, value: T) -> 'Maybe[T]':
        return cls(value)

    @classmethod
    def absent(cls) -> 'Maybe[T]':
        return NOTHING

    @property
    def is_present(self) -> bool:
        return self._value is not _ABSENT

    def get(self) -> T:
        if self._value is _ABSENT:
            raise ValueError('get() on an absent value')
        return self._value

    def get_or_else(self, default):
        return self._value if self._value is not _ABSENT else default

    def map(self, f: Callable[[T], U]) -> 'Maybe[U]':
        """Absent maps to absent; f is never invoked on it."""
        if self._value is _ABSENT:
            return NOTHING
        return Maybe(f(self._value))

    def __eq__(self, other):
        if not isinstance(other, Maybe):
            return NotImplemented
        if self._value is _ABSENT or other._value is _ABSENT:
            return self._value is other._value
        return self._value == other._value

    def __hash__(self):
        return hash(('Maybe', None if self._value is _ABSENT else self._value))

    def __repr__(self):
        if self._value is _ABSENT:
            return 'Nothing'
        return f'Some({self._value!r})'


NOTHING = Maybe()


def some(value):
    return Maybe(value)
