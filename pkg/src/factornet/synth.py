"""Synthetic ledger generation with injected laundering patterns and ground
truth, for desk-scale validation of the whole pipeline.

Output is bit-reproducible from the seed: the only randomness source is one
``random.Random`` (Mersenne Twister) instance, and every iteration order is
fixed. Criminal parties are made to look like the risky profile the models
target — bigger and more frequent transfers, risky sectors and regions,
shared owners inside clusters, more missing fields — while keeping enough
overlap with honest hubs that labels stay statistically, not perfectly,
separable.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import asdict, dataclass
from datetime import date, timedelta
from pathlib import Path

from .errors import ValidationError
from .ledger import LABEL_COLUMNS, LEDGER_COLUMNS
from .scoring import country_score
from .tables import FOREIGN, HIGH, RiskTables, default_tables

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs of one synthetic scenario. All effect sizes are explicit so
    scenarios can be tuned instead of re-coded."""

    seed: int = 7
    n_parties: int = 120
    n_transactions: int = 2_500
    fraction_criminal: float = 0.15
    # smurfing: pairs of clients splitting transfers under the threshold
    smurfing_pairs: int = 4
    smurfing_min_records: int = 3
    smurfing_max_records: int = 5
    # shared-owner clusters among criminal parties; each may also pull in
    # honest front companies, which is what makes the wake-up rule useful
    cluster_count: int = 3
    cluster_size: int = 4
    cluster_honest_members: int = 1
    # fraction of criminal rows carrying big amounts toward risky
    # counterparties; only some of those leave the country, so no single
    # foreign node turns into a hub that recentralizes the criminals
    corridor_fraction: float = 0.2
    corridor_foreign_rate: float = 0.25
    # log-normal amount model (euros). Honest hubs and criminals both get a
    # location boost (ranges overlap, so labels stay statistically separable
    # only): hubs form the big-amount core, criminals hang off it.
    amount_log_mean: float = 10.5
    amount_log_sigma: float = 0.8
    hub_fraction: float = 0.10
    hub_amount_boost: float = 0.9
    criminal_amount_boost_min: float = 0.6
    criminal_amount_boost_max: float = 1.6
    corridor_amount_boost: float = 0.5
    criminal_activity_boost: float = 1.8
    foreign_fraction: float = 0.01
    missing_debtor_rate: float = 0.01
    honest_missing_rate: float = 0.012
    criminal_missing_rate: float = 0.03
    criminal_high_sector_rate: float = 0.5
    honest_high_sector_rate: float = 0.15
    criminal_mafia_region_rate: float = 0.5
    start_day: str = "2013-11-01"
    n_days: int = 577

    def start_date(self) -> date:
        return date.fromisoformat(self.start_day)


#: Preset at the scale of a medium-large factoring portfolio: 559 clients
#: and 33,670 transfers over 19 months.
PAPER_SCALE = ScenarioConfig(
    seed=20131101,
    n_parties=559,
    n_transactions=33_670,
    fraction_criminal=0.2,
    smurfing_pairs=6,
    cluster_count=9,
    cluster_size=5,
)

PRESETS = {"paper-scale": PAPER_SCALE, "small": ScenarioConfig()}


@dataclass(frozen=True)
class ScenarioResult:
    ledger_rows: list[list[str]]
    labels: dict[str, int]
    truth: dict


def scenario_from_toml(path: Path) -> ScenarioConfig:
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    section = data.get("scenario", data)
    try:
        return ScenarioConfig(**section)
    except TypeError as exc:
        raise ValidationError(f"{path}: bad scenario config ({exc})") from None


def _validate(config: ScenarioConfig, n_criminals: int, n_honest: int, smurf_rows: int, n_foreign: int):
    if config.n_parties < 4:
        raise ValidationError("n_parties must be at least 4")
    if not 0.0 <= config.fraction_criminal <= 1.0:
        raise ValidationError("fraction_criminal must lie in [0, 1]")
    if config.cluster_size > config.n_parties:
        raise ValidationError(
            f"cluster_size {config.cluster_size} exceeds n_parties {config.n_parties}"
        )
    if n_criminals > 0 and config.cluster_count > 0:
        if config.cluster_size < 2:
            raise ValidationError("cluster_size must be at least 2")
        honest_per_cluster = min(config.cluster_honest_members, config.cluster_size - 1)
        criminal_need = config.cluster_count * (config.cluster_size - honest_per_cluster)
        if criminal_need > n_criminals:
            raise ValidationError(
                f"clusters need {criminal_need} criminal parties but only {n_criminals} exist"
            )
        if config.cluster_count * honest_per_cluster > n_honest:
            raise ValidationError("clusters need more honest parties than exist")
    floor = config.n_parties + n_foreign + smurf_rows
    if config.n_transactions < floor:
        raise ValidationError(
            f"n_transactions {config.n_transactions} cannot cover {floor} required rows"
        )


def generate(config: ScenarioConfig, tables: RiskTables | None = None) -> ScenarioResult:
    """Build one scenario: ledger rows (ingestion CSV schema), complete
    labels, and a truth report describing every injected pattern."""
    tables = tables if tables is not None else default_tables()
    rng = random.Random(config.seed)

    low_sectors = sorted(c for c, cls in tables.sector_class.items() if cls != HIGH)
    high_sectors = sorted(c for c, cls in tables.sector_class.items() if cls == HIGH)
    regions = sorted(tables.region_indicators)
    mafia_regions = [r for r in regions if tables.region_indicators[r].mafia_presence] or regions
    risky_countries = sorted(
        c for c in tables.country_indicators if c != "IT" and country_score(c, tables) == 3
    )
    clean_countries = sorted(
        c for c in tables.country_indicators if c != "IT" and country_score(c, tables) == 1
    )

    width = max(4, len(str(config.n_parties)))
    all_ids = [f"P{i:0{width}d}" for i in range(1, config.n_parties + 1)]
    n_foreign = min(round(config.foreign_fraction * config.n_parties), config.n_parties // 4)
    if n_foreign and not (risky_countries or clean_countries):
        raise ValidationError("foreign parties requested but the country table has no non-IT entries")
    foreign_ids = rng.sample(all_ids, n_foreign) if n_foreign else []
    foreign_set = set(foreign_ids)
    domestic_ids = [pid for pid in all_ids if pid not in foreign_set]

    n_criminals = round(config.fraction_criminal * len(domestic_ids))
    criminal_ids = sorted(rng.sample(domestic_ids, n_criminals)) if n_criminals else []
    criminal_set = set(criminal_ids)

    smurf_counts = [
        rng.randint(config.smurfing_min_records, config.smurfing_max_records)
        for _ in range(config.smurfing_pairs if criminal_ids else 0)
    ]
    n_honest_domestic = len(domestic_ids) - n_criminals
    _validate(config, n_criminals, n_honest_domestic, sum(smurf_counts), n_foreign)

    # --- static party attributes -------------------------------------------
    sector: dict[str, str] = {}
    region: dict[str, str] = {}
    country: dict[str, str] = {}
    owner: dict[str, str] = {}
    rep: dict[str, str] = {}
    for i, pid in enumerate(all_ids, start=1):
        criminal = pid in criminal_set
        if pid in foreign_set:
            region[pid] = FOREIGN
            pool = risky_countries if (risky_countries and i % 2 == 0) else (clean_countries or risky_countries)
            country[pid] = rng.choice(pool)
        else:
            country[pid] = "IT"
            if criminal and rng.random() < config.criminal_mafia_region_rate:
                region[pid] = rng.choice(mafia_regions)
            else:
                region[pid] = rng.choice(regions)
        high_p = config.criminal_high_sector_rate if criminal else config.honest_high_sector_rate
        sector[pid] = rng.choice(high_sectors if rng.random() < high_p else low_sectors)
        owner[pid] = f"O{i:0{width}d}"
        rep[pid] = f"R{i:0{width}d}"

    honest_domestic = [p for p in domestic_ids if p not in criminal_set]

    clusters: list[dict] = []
    if criminal_ids and config.cluster_count:
        honest_per_cluster = min(config.cluster_honest_members, config.cluster_size - 1)
        criminal_pool = list(criminal_ids)
        honest_pool = list(honest_domestic)
        for c in range(1, config.cluster_count + 1):
            members = rng.sample(criminal_pool, config.cluster_size - honest_per_cluster)
            fronts = rng.sample(honest_pool, honest_per_cluster) if honest_per_cluster else []
            for m in members:
                criminal_pool.remove(m)
            for m in fronts:
                honest_pool.remove(m)
            members = sorted(members + fronts)
            for m in members:
                owner[m] = f"OC{c:03d}"
            clusters.append(
                {"owner_id": f"OC{c:03d}", "members": members, "front_members": sorted(fronts)}
            )

    # --- activity weights, amount offsets, partner structure -----------------
    n_hubs = max(1, round(config.hub_fraction * len(honest_domestic))) if honest_domestic else 0
    hubs = sorted(rng.sample(honest_domestic, n_hubs)) if n_hubs else []
    hub_set = set(hubs)

    weight = {}
    mu_offset = {}
    for pid in domestic_ids:
        base = max(0.2, rng.paretovariate(1.5) - 0.5)
        if pid in criminal_set:
            weight[pid] = base * config.criminal_activity_boost
            mu_offset[pid] = rng.uniform(
                config.criminal_amount_boost_min, config.criminal_amount_boost_max
            )
        elif pid in hub_set:
            weight[pid] = base * 4.0
            mu_offset[pid] = config.hub_amount_boost
        else:
            weight[pid] = base
            mu_offset[pid] = 0.0
    sellers = list(domestic_ids)
    seller_weights = [weight[pid] for pid in sellers]

    partner: dict[str, list[str]] = {}
    for pid in criminal_ids:
        own_cluster = next((c["members"] for c in clusters if pid in c["members"]), [])
        candidates = sorted((set(own_cluster) | criminal_set) - {pid})
        chosen = rng.sample(candidates, min(len(candidates), rng.randint(2, 3))) if candidates else []
        chosen += rng.sample(honest_domestic, min(2, len(honest_domestic)))
        partner[pid] = sorted(set(chosen) - {pid}) or [p for p in domestic_ids if p != pid][:1]

    # --- row assembly --------------------------------------------------------
    rows: list[dict] = []
    corridor_rows = 0

    def amount_for(seller_id: str, corridor: bool) -> float:
        mu = config.amount_log_mean + mu_offset.get(seller_id, 0.0)
        if corridor:
            mu += config.corridor_amount_boost
        value = math.exp(rng.gauss(mu, config.amount_log_sigma))
        return round(min(value, 5e7), 2)

    def emit(seller_id: str, debtor_id: str | None, amount: float, day: date, *, smurf=False):
        criminal = seller_id in criminal_set
        missing_p = config.criminal_missing_rate if criminal else config.honest_missing_rate
        row = {
            "timestamp": day.isoformat(),
            "seller_id": seller_id,
            "debtor_id": debtor_id or "",
            "amount": f"{amount:.2f}",
            "owner_id": "" if (not smurf and rng.random() < missing_p) else owner[seller_id],
            "representative_id": "" if (not smurf and rng.random() < missing_p) else rep[seller_id],
            "country": country[debtor_id] if debtor_id else "",
            "seller_sector": sector[seller_id],
            "debtor_sector": sector[debtor_id] if debtor_id else "",
            "seller_region": region[seller_id],
            "debtor_region": region[debtor_id] if debtor_id else "",
        }
        rows.append(row)
        return row

    def random_day() -> date:
        return config.start_date() + timedelta(days=rng.randrange(config.n_days))

    # Coverage sweep: every domestic party sells once (ring order), every
    # foreign party is paid by one honest seller — no party can end up
    # unlabeled-but-present or labeled-but-absent.
    ring = list(domestic_ids)
    rng.shuffle(ring)
    for i, pid in enumerate(ring):
        debtor = ring[(i + 1) % len(ring)]
        emit(pid, debtor, amount_for(pid, False), random_day())
    honest_ids = [p for p in domestic_ids if p not in criminal_set] or domestic_ids
    for pid in foreign_ids:
        seller_id = rng.choice(honest_ids)
        emit(seller_id, pid, amount_for(seller_id, False), random_day())

    # Smurfing injections: sub-threshold records for one ordered pair inside
    # one aggregation window; each record stays below the threshold while the
    # pair total always reaches it.
    smurfing_truth = []
    if smurf_counts:
        smurf_sellers = rng.sample(criminal_ids, min(len(criminal_ids), len(smurf_counts)))
        for idx, k in enumerate(smurf_counts):
            seller = smurf_sellers[idx % len(smurf_sellers)]
            debtor = rng.choice(partner[seller])
            base_day = config.start_date() + timedelta(days=rng.randrange(max(1, config.n_days - 15)))
            span = max(1, min(tables.aggregation_window - 1, 10))
            emitted = []
            for _ in range(k):
                day = base_day + timedelta(days=rng.randrange(span))
                emitted.append(emit(seller, debtor, float(rng.randint(5_000, 9_000)), day, smurf=True))
            smurfing_truth.append(
                {"seller": seller, "debtor": debtor, "n_records": k, "rows": emitted}
            )

    # Background traffic for the rest of the budget.
    remaining = config.n_transactions - len(rows)
    for _ in range(remaining):
        seller_id = rng.choices(sellers, weights=seller_weights, k=1)[0]
        if rng.random() < config.missing_debtor_rate:
            emit(seller_id, None, amount_for(seller_id, False), random_day())
            continue
        corridor = False
        if seller_id in criminal_set:
            if rng.random() < config.corridor_fraction:
                corridor = True
                corridor_rows += 1
                risky_foreign = [p for p in foreign_ids if country_score(country[p], tables) == 3]
                if risky_foreign and rng.random() < config.corridor_foreign_rate:
                    debtor = rng.choice(risky_foreign)
                else:
                    debtor = rng.choice(partner[seller_id])
            else:
                debtor = rng.choice(partner[seller_id])
        else:
            debtor = rng.choices(sellers, weights=seller_weights, k=1)[0]
            if debtor == seller_id:
                debtor = sellers[(sellers.index(seller_id) + 1) % len(sellers)]
        emit(seller_id, debtor, amount_for(seller_id, corridor), random_day())

    # Chronological order, then sequential ids so the file reads like a DB dump.
    rows.sort(key=lambda r: r["timestamp"])
    id_width = len(str(len(rows)))
    ledger_rows = []
    for i, row in enumerate(rows, start=1):
        row["txn_id"] = f"T{i:0{id_width}d}"
        ledger_rows.append([row[c] for c in LEDGER_COLUMNS])
    for entry in smurfing_truth:
        entry["txn_ids"] = sorted(r["txn_id"] for r in entry.pop("rows"))

    labels = {pid: (1 if pid in criminal_set else 0) for pid in sorted(all_ids)}
    truth = {
        "seed": config.seed,
        "config": asdict(config),
        "criminal_parties": criminal_ids,
        "clusters": clusters,
        "smurfing": smurfing_truth,
        "corridor_rows": corridor_rows,
        "n_rows": len(ledger_rows),
    }
    return ScenarioResult(ledger_rows=ledger_rows, labels=labels, truth=truth)


def write_scenario(result: ScenarioResult, out_dir: Path) -> dict[str, Path]:
    """Write ledger.csv / labels.csv / truth.json into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "ledger": out_dir / "ledger.csv",
        "labels": out_dir / "labels.csv",
        "truth": out_dir / "truth.json",
    }
    with open(paths["ledger"], "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(LEDGER_COLUMNS)
        writer.writerows(result.ledger_rows)
    with open(paths["labels"], "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(LABEL_COLUMNS)
        for pid, label in result.labels.items():
            writer.writerow([pid, label])
    paths["truth"].write_text(
        json.dumps(result.truth, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return paths
