"""Transaction-ledger ingestion: parsing, validation, party deduplication,
label loading, and the legal recording threshold with sub-amount aggregation.

A ledger CSV row carries the transfer itself (debtor pays the seller's
credit) plus the attributes needed to score both endpoints. Blank cells mean
"missing" and are preserved as ``None``; they are never imputed.
"""

from __future__ import annotations

import csv
import logging
from bisect import bisect_right
from dataclasses import dataclass, replace
from datetime import date
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .errors import ValidationError
from .tables import FOREIGN, RiskTables

logger = logging.getLogger(__name__)

LEDGER_COLUMNS = [
    "txn_id",
    "timestamp",
    "seller_id",
    "debtor_id",
    "amount",
    "owner_id",
    "representative_id",
    "country",
    "seller_sector",
    "debtor_sector",
    "seller_region",
    "debtor_region",
]

LABEL_COLUMNS = ["party_id", "high_risk"]


@dataclass(frozen=True)
class TransactionRecord:
    """One validated ledger row. Optional identifiers are None when the
    source cell was blank."""

    txn_id: str
    timestamp: date
    seller_id: str
    debtor_id: str | None
    amount: Decimal
    owner_id: str | None
    representative_id: str | None
    country: str | None
    seller_sector: str
    debtor_sector: str | None
    seller_region: str
    debtor_region: str | None

    def as_csv_row(self) -> list[str]:
        return [
            self.txn_id,
            self.timestamp.isoformat(),
            self.seller_id,
            self.debtor_id or "",
            str(self.amount),
            self.owner_id or "",
            self.representative_id or "",
            self.country or "",
            self.seller_sector,
            self.debtor_sector or "",
            self.seller_region,
            self.debtor_region or "",
        ]


@dataclass(frozen=True)
class Party:
    """A client node. ``high_risk_label`` is 0/1 when a label file row
    exists for the party and None (unknown) otherwise."""

    party_id: str
    sector_code: str
    region: str
    country: str | None = None
    high_risk_label: int | None = None

    @property
    def is_foreign(self) -> bool:
        return self.region == FOREIGN


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of the recording-threshold filter."""

    records: list[TransactionRecord]
    dropped: int


def _clean(cell: str | None) -> str | None:
    value = (cell or "").strip()
    return value or None


class _PartyBuilder:
    """Accumulates per-party attributes across rows, rejecting conflicts."""

    def __init__(self):
        self._attrs: dict[str, dict[str, tuple[str, int]]] = {}

    def observe(self, party_id: str, line: int, **attrs: str | None):
        slot = self._attrs.setdefault(party_id, {})
        for key, value in attrs.items():
            if value is None:
                continue
            seen = slot.get(key)
            if seen is not None and seen[0] != value:
                raise ValidationError(
                    f"party {party_id!r} has conflicting {key}: "
                    f"{seen[0]!r} (row {seen[1]}) vs {value!r}",
                    row=line,
                )
            slot.setdefault(key, (value, line))

    def build(self) -> list[Party]:
        parties = []
        for party_id in sorted(self._attrs):
            slot = self._attrs[party_id]
            parties.append(
                Party(
                    party_id=party_id,
                    sector_code=slot["sector"][0],
                    region=slot["region"][0],
                    country=slot["country"][0] if "country" in slot else None,
                )
            )
        return parties


def load_ledger(path: Path, tables: RiskTables) -> tuple[list[TransactionRecord], list[Party]]:
    """Parse and validate a ledger CSV.

    Returns the record list in file order plus the deduplicated parties
    (sorted by id). Any schema or consistency violation raises
    ``ValidationError`` naming the offending line.
    """
    records: list[TransactionRecord] = []
    seen_ids: dict[str, int] = {}
    builder = _PartyBuilder()

    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            return [], []  # zero-byte file: empty ledger
        if reader.fieldnames != LEDGER_COLUMNS:
            raise ValidationError(
                f"{path}: expected header {','.join(LEDGER_COLUMNS)}, "
                f"got {','.join(reader.fieldnames)}"
            )
        for row in reader:
            line = reader.line_num
            if None in row or any(v is None for v in row.values()):
                raise ValidationError("wrong number of fields", row=line)
            records.append(_parse_row(row, line, tables, seen_ids, builder))

    return records, builder.build()


def _parse_row(
    row: dict[str, str],
    line: int,
    tables: RiskTables,
    seen_ids: dict[str, int],
    builder: _PartyBuilder,
) -> TransactionRecord:
    txn_id = _clean(row["txn_id"])
    if txn_id is None:
        raise ValidationError("empty txn_id", row=line)
    if txn_id in seen_ids:
        raise ValidationError(
            f"duplicate txn_id {txn_id!r} (first seen at row {seen_ids[txn_id]})", row=line
        )
    seen_ids[txn_id] = line

    try:
        timestamp = date.fromisoformat(row["timestamp"].strip())
    except ValueError:
        raise ValidationError(f"timestamp must be an ISO date, got {row['timestamp']!r}", row=line) from None

    seller_id = _clean(row["seller_id"])
    if seller_id is None:
        raise ValidationError("seller_id is required", row=line)

    try:
        amount = Decimal(row["amount"].strip())
    except InvalidOperation:
        raise ValidationError(f"amount must be a decimal number, got {row['amount']!r}", row=line) from None
    if amount <= 0:
        raise ValidationError(f"amount must be positive, got {amount}", row=line)

    seller_sector = _clean(row["seller_sector"])
    seller_region = _clean(row["seller_region"])
    if seller_sector is None or seller_region is None:
        raise ValidationError("seller_sector and seller_region are required", row=line)
    _check_sector(seller_sector, line, tables)
    _check_region(seller_region, line, tables)

    debtor_id = _clean(row["debtor_id"])
    country = _clean(row["country"])
    if country is not None:
        country = country.upper()
        if len(country) != 2 or not country.isalpha():
            raise ValidationError(f"country must be a two-letter code, got {row['country']!r}", row=line)

    if debtor_id is None:
        # Debtor unrecorded: attribute cells for the debtor side are ignored.
        debtor_sector = debtor_region = None
    else:
        debtor_sector = _clean(row["debtor_sector"])
        debtor_region = _clean(row["debtor_region"])
        if debtor_sector is None or debtor_region is None:
            raise ValidationError("debtor_sector and debtor_region are required when debtor_id is set", row=line)
        _check_sector(debtor_sector, line, tables)
        _check_region(debtor_region, line, tables)
        if country is None:
            raise ValidationError("country is required when debtor_id is set", row=line)
        if debtor_region == FOREIGN and country not in tables.country_indicators:
            raise ValidationError(f"unknown country {country!r} for foreign debtor", row=line)

    builder.observe(seller_id, line, sector=seller_sector, region=seller_region)
    if debtor_id is not None:
        builder.observe(debtor_id, line, sector=debtor_sector, region=debtor_region, country=country)

    return TransactionRecord(
        txn_id=txn_id,
        timestamp=timestamp,
        seller_id=seller_id,
        debtor_id=debtor_id,
        amount=amount,
        owner_id=_clean(row["owner_id"]),
        representative_id=_clean(row["representative_id"]),
        country=country,
        seller_sector=seller_sector,
        debtor_sector=debtor_sector,
        seller_region=seller_region,
        debtor_region=debtor_region,
    )


def _check_sector(code: str, line: int, tables: RiskTables):
    if code not in tables.sector_class:
        raise ValidationError(f"sector code {code!r} not present in the sector table", row=line)


def _check_region(region: str, line: int, tables: RiskTables):
    if region != FOREIGN and region not in tables.region_indicators:
        raise ValidationError(f"unknown region {region!r}", row=line)


def apply_recording_threshold(
    records: list[TransactionRecord], tables: RiskTables
) -> ThresholdResult:
    """Keep records at or above the recording threshold, plus every
    sub-threshold record of an ordered (seller, debtor) pair whose total
    within some sliding window of ``aggregation_window`` days reaches it.

    Windows are anchored at each record's date and include both smaller and
    larger records of the pair; a record with no recorded debtor cannot be
    aggregated and must clear the threshold on its own. Records pass through
    unmodified and in their original order. Idempotent.
    """
    threshold = tables.recording_threshold
    window = tables.aggregation_window

    by_pair: dict[tuple[str, str], list[int]] = {}
    for idx, rec in enumerate(records):
        if rec.debtor_id is not None:
            by_pair.setdefault((rec.seller_id, rec.debtor_id), []).append(idx)

    keep = [rec.amount >= threshold for rec in records]

    for indices in by_pair.values():
        indices.sort(key=lambda i: (records[i].timestamp, i))
        days = [records[i].timestamp.toordinal() for i in indices]
        amounts = [records[i].amount for i in indices]
        prefix = [Decimal(0)]
        for a in amounts:
            prefix.append(prefix[-1] + a)
        # For each anchor j, the window covers records j..end_j; a qualifying
        # window marks them all kept. covered_to tracks the furthest marked
        # position so each record is visited O(1) times.
        covered_to = -1
        for j in range(len(indices)):
            end = bisect_right(days, days[j] + window) - 1
            if prefix[end + 1] - prefix[j] >= threshold:
                for pos in range(max(j, covered_to + 1), end + 1):
                    keep[indices[pos]] = True
                covered_to = max(covered_to, end)

    kept = [rec for rec, ok in zip(records, keep) if ok]
    dropped = len(records) - len(kept)
    if dropped:
        logger.info("recording threshold dropped %d of %d records", dropped, len(records))
    return ThresholdResult(records=kept, dropped=dropped)


def load_labels(path: Path, parties: list[Party]) -> tuple[list[Party], int]:
    """Apply a ``party_id,high_risk`` label file.

    Labels for unknown parties are skipped with a warning; label values
    outside {0, 1} are an error. Returns the updated party list and the
    number of parties labeled.
    """
    known = {p.party_id: p for p in parties}
    labels: dict[str, int] = {}
    seen_rows: dict[str, int] = {}

    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            return list(parties), 0
        if reader.fieldnames != LABEL_COLUMNS:
            raise ValidationError(
                f"{path}: expected header {','.join(LABEL_COLUMNS)}, "
                f"got {','.join(reader.fieldnames)}"
            )
        for row in reader:
            line = reader.line_num
            party_id = _clean(row["party_id"])
            if party_id is None:
                raise ValidationError("empty party_id", row=line)
            value = (row["high_risk"] or "").strip()
            if value not in ("0", "1"):
                raise ValidationError(f"high_risk must be 0 or 1, got {row['high_risk']!r}", row=line)
            if party_id in seen_rows:
                raise ValidationError(
                    f"duplicate label for {party_id!r} (first seen at row {seen_rows[party_id]})",
                    row=line,
                )
            seen_rows[party_id] = line
            if party_id not in known:
                logger.warning("label row %d: unknown party %r, skipped", line, party_id)
                continue
            labels[party_id] = int(value)

    updated = [
        replace(p, high_risk_label=labels[p.party_id]) if p.party_id in labels else p
        for p in parties
    ]
    return updated, len(labels)
