"""Editable reference tables: sector risk classes, region and country
indicators, amount bins, and the legal recording threshold.

Tables ship with bundled defaults (``factornet/data/``) and can be replaced
by operator-supplied CSVs referenced from a TOML config.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

from .errors import ValidationError

FOREIGN = "FOREIGN"
LOW = "LOW"
HIGH = "HIGH"

DEFAULT_AMOUNT_BINS = (Decimal(50_000), Decimal(250_000))
DEFAULT_RECORDING_THRESHOLD = Decimal(15_000)
DEFAULT_AGGREGATION_WINDOW = 30
DEFAULT_CPI_CUTOFF = 50.0


@dataclass(frozen=True)
class RegionIndicators:
    """Raw per-region inputs to the geographic risk score."""

    crime_rate: float
    suspicious_ops: float
    mafia_presence: int

    def __post_init__(self):
        if self.mafia_presence not in (0, 1):
            raise ValidationError(
                f"mafia_presence must be 0 or 1, got {self.mafia_presence!r}"
            )


@dataclass(frozen=True)
class CountryIndicators:
    """Raw per-country inputs to the geographic risk score."""

    white_list: bool
    tax_haven: bool
    ocse_compliant: bool
    cpi: float
    fatf_listed: bool


@dataclass(frozen=True)
class RiskTables:
    """All operator-editable reference data used by scoring and ingestion."""

    sector_class: Mapping[str, str]
    region_indicators: Mapping[str, RegionIndicators]
    country_indicators: Mapping[str, CountryIndicators]
    amount_bins: tuple[Decimal, ...] = DEFAULT_AMOUNT_BINS
    recording_threshold: Decimal = DEFAULT_RECORDING_THRESHOLD
    aggregation_window: int = DEFAULT_AGGREGATION_WINDOW
    cpi_cutoff: float = DEFAULT_CPI_CUTOFF

    def __post_init__(self):
        bins = tuple(Decimal(b) for b in self.amount_bins)
        if len(bins) != 2 or bins[0] >= bins[1]:
            raise ValidationError(
                f"amount_bins must be two strictly increasing thresholds, got {bins}"
            )
        object.__setattr__(self, "amount_bins", bins)
        object.__setattr__(self, "recording_threshold", Decimal(self.recording_threshold))
        if self.recording_threshold <= 0:
            raise ValidationError("recording_threshold must be positive")
        if self.aggregation_window <= 0:
            raise ValidationError("aggregation_window must be a positive day count")
        bad = {c for c in self.sector_class.values()} - {LOW, HIGH}
        if bad:
            raise ValidationError(f"sector classes must be LOW or HIGH, got {sorted(bad)}")


def _read_csv(path: Path, expected_header: list[str]) -> Iterator[tuple[int, dict[str, str]]]:
    """Yield (line_number, row) pairs, enforcing the exact header."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != expected_header:
            raise ValidationError(
                f"{path}: expected header {','.join(expected_header)}, "
                f"got {','.join(reader.fieldnames or ['<empty>'])}"
            )
        for row in reader:
            yield reader.line_num, row


def _parse_bool(text: str, *, row: int, column: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes"):
        return True
    if value in ("0", "false", "no"):
        return False
    raise ValidationError(f"{column} must be boolean (0/1), got {text!r}", row=row)


def _parse_float(text: str, *, row: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"{column} must be numeric, got {text!r}", row=row) from None


def load_sector_table(path: Path) -> dict[str, str]:
    """Load ``sector_code,class`` rows; class must be LOW or HIGH."""
    out: dict[str, str] = {}
    for line, row in _read_csv(Path(path), ["sector_code", "class"]):
        code = row["sector_code"].strip()
        cls = row["class"].strip().upper()
        if not code:
            raise ValidationError("empty sector_code", row=line)
        if cls not in (LOW, HIGH):
            raise ValidationError(f"class must be LOW or HIGH, got {row['class']!r}", row=line)
        if code in out:
            raise ValidationError(f"duplicate sector_code {code!r}", row=line)
        out[code] = cls
    return out


def load_region_table(path: Path) -> dict[str, RegionIndicators]:
    """Load ``region,crime_rate,suspicious_ops,mafia_presence`` rows."""
    out: dict[str, RegionIndicators] = {}
    header = ["region", "crime_rate", "suspicious_ops", "mafia_presence"]
    for line, row in _read_csv(Path(path), header):
        name = row["region"].strip()
        if not name:
            raise ValidationError("empty region name", row=line)
        if name == FOREIGN:
            raise ValidationError(f"{FOREIGN!r} is reserved and cannot be a region name", row=line)
        if name in out:
            raise ValidationError(f"duplicate region {name!r}", row=line)
        mafia = row["mafia_presence"].strip()
        if mafia not in ("0", "1"):
            raise ValidationError(f"mafia_presence must be 0 or 1, got {mafia!r}", row=line)
        out[name] = RegionIndicators(
            crime_rate=_parse_float(row["crime_rate"], row=line, column="crime_rate"),
            suspicious_ops=_parse_float(row["suspicious_ops"], row=line, column="suspicious_ops"),
            mafia_presence=int(mafia),
        )
    return out


def load_country_table(path: Path) -> dict[str, CountryIndicators]:
    """Load ``country,white_list,tax_haven,ocse_compliant,cpi,fatf_listed`` rows."""
    out: dict[str, CountryIndicators] = {}
    header = ["country", "white_list", "tax_haven", "ocse_compliant", "cpi", "fatf_listed"]
    for line, row in _read_csv(Path(path), header):
        code = row["country"].strip().upper()
        if len(code) != 2 or not code.isalpha():
            raise ValidationError(f"country must be a two-letter code, got {row['country']!r}", row=line)
        if code in out:
            raise ValidationError(f"duplicate country {code!r}", row=line)
        out[code] = CountryIndicators(
            white_list=_parse_bool(row["white_list"], row=line, column="white_list"),
            tax_haven=_parse_bool(row["tax_haven"], row=line, column="tax_haven"),
            ocse_compliant=_parse_bool(row["ocse_compliant"], row=line, column="ocse_compliant"),
            cpi=_parse_float(row["cpi"], row=line, column="cpi"),
            fatf_listed=_parse_bool(row["fatf_listed"], row=line, column="fatf_listed"),
        )
    return out


def _bundled(name: str) -> Path:
    return Path(str(resources.files("factornet").joinpath("data", name)))


def default_tables(**overrides) -> RiskTables:
    """Tables built from the CSVs bundled with the package.

    Keyword overrides replace individual ``RiskTables`` fields (thresholds,
    bins, window) without touching the reference CSV content.
    """
    tables = RiskTables(
        sector_class=load_sector_table(_bundled("sectors.csv")),
        region_indicators=load_region_table(_bundled("regions.csv")),
        country_indicators=load_country_table(_bundled("countries.csv")),
    )
    return replace(tables, **overrides) if overrides else tables


def tables_from_config(config: Mapping, base_dir: Path) -> RiskTables:
    """Build ``RiskTables`` from a parsed ``[tables]`` config section.

    File references are resolved relative to ``base_dir``; omitted files
    fall back to the bundled defaults.
    """
    section = config.get("tables", {})

    def _file(key: str, default_name: str) -> Path:
        if key in section:
            return (Path(base_dir) / section[key]).resolve()
        return _bundled(default_name)

    try:
        bins = tuple(Decimal(str(b)) for b in section.get("amount_bins", DEFAULT_AMOUNT_BINS))
        threshold = Decimal(str(section.get("recording_threshold", DEFAULT_RECORDING_THRESHOLD)))
    except InvalidOperation as exc:
        raise ValidationError(f"invalid numeric value in [tables]: {exc}") from None
    return RiskTables(
        sector_class=load_sector_table(_file("sectors", "sectors.csv")),
        region_indicators=load_region_table(_file("regions", "regions.csv")),
        country_indicators=load_country_table(_file("countries", "countries.csv")),
        amount_bins=bins,
        recording_threshold=threshold,
        aggregation_window=int(section.get("aggregation_window", DEFAULT_AGGREGATION_WINDOW)),
        cpi_cutoff=float(section.get("cpi_cutoff", DEFAULT_CPI_CUTOFF)),
    )
