"""Phone inventory handling and phoneme-transcript tokenization."""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DuplicatePhone, InventoryError, IoFailure, MissingUnk, UnknownPhone

UNK = "<unk>"

KIND_STANDARD = "standard_arpabet"
KIND_UNKNOWN = "unknown_tag"
KIND_L2 = "l2_extension"

# The 39 phones of the ARPABET set used by the CMU Pronouncing Dictionary.
ARPABET_39 = frozenset(
    """
    AA AE AH AO AW AY B CH D DH EH ER EY F G HH IH IY JH K L M N NG
    OW OY P R S SH T TH UH UW V W Y Z ZH
    """.split()
)

_STRESS_SUFFIX = re.compile(r"[0-2]+$")
_SYMBOL_RE = re.compile(r"^[A-Z]{1,3}$")


def strip_stress(symbol: str) -> str:
    """Drop trailing CMUDict stress digits (0-2). Idempotent."""
    return _STRESS_SUFFIX.sub("", symbol)


def classify(symbol: str) -> str:
    if symbol == UNK:
        return KIND_UNKNOWN
    if symbol in ARPABET_39:
        return KIND_STANDARD
    return KIND_L2


@dataclass(frozen=True)
class Phone:
    symbol: str
    kind: str

    def __post_init__(self):
        if not self.symbol or any(c.isspace() for c in self.symbol):
            raise InventoryError(f"invalid phone symbol: {self.symbol!r}")
        if self.symbol == UNK:
            if self.kind != KIND_UNKNOWN:
                raise InventoryError("'<unk>' must have the unknown_tag kind")
        else:
            if self.kind == KIND_UNKNOWN:
                raise InventoryError(f"only '<unk>' may be unknown_tag, got {self.symbol!r}")
            if not _SYMBOL_RE.match(self.symbol):
                raise InventoryError(f"phone symbol must be 1-3 uppercase letters: {self.symbol!r}")

    @classmethod
    def of(cls, symbol: str) -> "Phone":
        return cls(symbol, classify(symbol))


class PhoneInventory:
    """Immutable set of valid phones; safe to share across threads."""

    def __init__(self, phones: Iterable[Phone], name: str = "inventory"):
        self.name = name
        self._by_symbol: dict[str, Phone] = {}
        for phone in phones:
            if phone.symbol in self._by_symbol:
                raise DuplicatePhone(phone.symbol)
            self._by_symbol[phone.symbol] = phone
        if UNK not in self._by_symbol:
            raise MissingUnk()

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._by_symbol

    def __len__(self) -> int:
        return len(self._by_symbol)

    def __iter__(self) -> Iterator[Phone]:
        return iter(self._by_symbol.values())

    @property
    def symbols(self) -> list[str]:
        return list(self._by_symbol)

    @property
    def unk(self) -> Phone:
        return self._by_symbol[UNK]

    def get(self, symbol: str) -> Phone:
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise UnknownPhone(symbol, -1) from None

    @classmethod
    def from_symbols(cls, symbols: Iterable[str], name: str = "inventory") -> "PhoneInventory":
        return cls((Phone.of(s) for s in symbols), name=name)


@dataclass(frozen=True)
class PhoneSequence:
    phones: tuple[Phone, ...]

    def __len__(self) -> int:
        return len(self.phones)

    def __iter__(self) -> Iterator[Phone]:
        return iter(self.phones)

    def __getitem__(self, i):
        return self.phones[i]

    @property
    def symbols(self) -> list[str]:
        return [p.symbol for p in self.phones]

    def render(self) -> str:
        """Inverse of tokenize: symbols joined by single spaces."""
        return " ".join(p.symbol for p in self.phones)

    @classmethod
    def empty(cls) -> "PhoneSequence":
        return cls(())


def normalize_symbol(token: str) -> str:
    """Uppercase a raw token; the '<unk>' tag is matched case-insensitively."""
    if token.lower() == UNK:
        return UNK
    return token.upper()


def tokenize(
    text: str,
    inventory: PhoneInventory,
    *,
    strip_stress_digits: bool = False,
) -> PhoneSequence:
    """Split a whitespace-separated phone string and validate each token.

    Raises UnknownPhone at the first token not in the inventory.
    """
    phones = []
    for i, token in enumerate(text.split()):
        symbol = normalize_symbol(token)
        if strip_stress_digits and symbol != UNK:
            symbol = strip_stress(symbol)
        if symbol not in inventory:
            raise UnknownPhone(token, i)
        phones.append(inventory.get(symbol))
    return PhoneSequence(tuple(phones))


def tokenize_lenient(
    text: str,
    inventory: PhoneInventory,
    *,
    strip_stress_digits: bool = False,
) -> tuple[PhoneSequence, list[tuple[str, int]]]:
    """Tokenize, mapping out-of-inventory tokens to '<unk>'.

    Never fails and preserves token count. Returns the sequence and the
    (token, position) list of replacements made.
    """
    phones = []
    unknowns: list[tuple[str, int]] = []
    for i, token in enumerate(text.split()):
        symbol = normalize_symbol(token)
        if strip_stress_digits and symbol != UNK:
            symbol = strip_stress(symbol)
        if symbol in inventory:
            phones.append(inventory.get(symbol))
        else:
            phones.append(inventory.unk)
            unknowns.append((token, i))
    return PhoneSequence(tuple(phones)), unknowns


def _parse_inventory_lines(lines: Iterable[str], name: str) -> PhoneInventory:
    symbols = []
    for line in lines:
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        symbols.append(normalize_symbol(body))
    return PhoneInventory.from_symbols(symbols, name=name)


def load_inventory(path: str | Path | None = None) -> PhoneInventory:
    """Load an inventory file (one symbol per line, '#' comments).

    With no path, loads the bundled 46-unit default.
    """
    if path is None:
        text = resources.files("captbench.data").joinpath("phones_46.txt").read_text("utf-8")
        return _parse_inventory_lines(text.splitlines(), name="default-46")
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    return _parse_inventory_lines(text.splitlines(), name=path.stem)
