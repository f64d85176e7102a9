"""Risk scores on the 1-to-3 scale: amount bins, sector classes, and
geographic scores for Italian regions and foreign countries.

Arc scores combine the two endpoint node scores (mean by default, max as a
configurable alternative), so every score stays inside [1, 3].
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from .errors import ValidationError
from .ledger import Party
from .tables import HIGH, RiskTables

ARC_COMBINE_MODES = ("mean", "max")

# Percentile cut points for ranked region indicators: lowest ~30% -> 1,
# middle ~40% -> 2, highest ~30% -> 3.
_PCT_LOW = 0.30
_PCT_MID = 0.70


@dataclass(frozen=True)
class RegionRiskEntry:
    """Combined geographic risk for one region: the mean of three partial
    scores (crime rate, suspicious operations, mafia presence)."""

    region: str
    partial_scores: tuple[int, int, int]
    combined: float


def bin_amount(amount: Decimal | float | int, tables: RiskTables) -> int:
    """Score a transaction amount into {1, 2, 3} against the configured bins."""
    amount = Decimal(str(amount)) if not isinstance(amount, Decimal) else amount
    if amount <= 0:
        raise ValidationError(f"amount must be positive, got {amount}")
    low, high = tables.amount_bins[0], tables.amount_bins[-1]
    if amount < low:
        return 1
    if amount < high:
        return 2
    return 3


def _rank_partials(values: dict[str, float]) -> dict[str, int]:
    """Percentile-bucket one indicator.

    Rank is competition style (ties share the lowest rank, hence the lower
    bucket); the rank fraction r/n is compared against the 30/70 cuts.
    """
    n = len(values)
    ordered = sorted(values.values())
    partials = {}
    for region, value in values.items():
        rank = 1 + sum(1 for v in ordered if v < value)
        fraction = rank / n
        if fraction <= _PCT_LOW:
            partials[region] = 1
        elif fraction <= _PCT_MID:
            partials[region] = 2
        else:
            partials[region] = 3
    return partials


def region_scores(tables: RiskTables) -> dict[str, RegionRiskEntry]:
    """Compute the per-region combined risk score.

    Crime rate and suspicious-operation counts are ranked across regions and
    bucketed 30/40/30 into partial scores 1/2/3; the binary mafia-presence
    indicator maps 0 -> 1 and 1 -> 3. The combined score is the arithmetic
    mean of the three partials.
    """
    regions = tables.region_indicators
    if len(regions) < 4:
        raise ValidationError(
            f"need at least 4 regions to form percentile buckets, got {len(regions)}"
        )
    crime = _rank_partials({r: ind.crime_rate for r, ind in regions.items()})
    suspicious = _rank_partials({r: ind.suspicious_ops for r, ind in regions.items()})
    out = {}
    for region, ind in regions.items():
        partials = (crime[region], suspicious[region], 3 if ind.mafia_presence else 1)
        out[region] = RegionRiskEntry(
            region=region, partial_scores=partials, combined=sum(partials) / 3
        )
    return out


def country_score(country: str, tables: RiskTables) -> int:
    """Score a foreign country in {1, 2, 3} by counting indicator penalties.

    One penalty each for: not white-listed, tax haven, OCSE non-compliance,
    CPI below the configured cutoff, FATF listing. 0 penalties -> 1,
    1-2 -> 2, 3 or more -> 3.
    """
    ind = tables.country_indicators.get(country)
    if ind is None:
        raise ValidationError(f"unknown country {country!r}")
    penalties = (
        (not ind.white_list)
        + ind.tax_haven
        + (not ind.ocse_compliant)
        + (ind.cpi < tables.cpi_cutoff)
        + ind.fatf_listed
    )
    if penalties == 0:
        return 1
    if penalties <= 2:
        return 2
    return 3


def node_sector_score(party: Party, tables: RiskTables) -> int:
    """Sector risk of a party: LOW -> 1, HIGH -> 3."""
    cls = tables.sector_class.get(party.sector_code)
    if cls is None:
        raise ValidationError(
            f"party {party.party_id!r}: sector code {party.sector_code!r} "
            "not present in the sector table"
        )
    return 3 if cls == HIGH else 1


def node_geo_score(
    party: Party,
    tables: RiskTables,
    regions: dict[str, RegionRiskEntry] | None = None,
) -> float:
    """Geographic risk of a party: region score for Italian parties, country
    score for foreign ones. ``regions`` may carry precomputed region entries."""
    if party.is_foreign:
        if party.country is None:
            raise ValidationError(
                f"party {party.party_id!r} is foreign but has no known country"
            )
        return float(country_score(party.country, tables))
    regions = regions if regions is not None else region_scores(tables)
    entry = regions.get(party.region)
    if entry is None:
        raise ValidationError(f"party {party.party_id!r}: unknown region {party.region!r}")
    return entry.combined


def arc_score(seller_score: float, debtor_score: float, combine: str = "mean") -> float:
    """Combine the two endpoint node scores into an arc weight."""
    for score in (seller_score, debtor_score):
        if not 1 <= score <= 3:
            raise ValidationError(f"node score {score} outside [1, 3]")
    if combine == "mean":
        return (seller_score + debtor_score) / 2
    if combine == "max":
        return max(seller_score, debtor_score)
    raise ValidationError(f"arc combine mode must be one of {ARC_COMBINE_MODES}, got {combine!r}")
