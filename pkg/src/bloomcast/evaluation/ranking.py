"""Cross-horizon model ranking by station-averaged R2.

Each (model, feature-extraction) combo gets a competition rank per
horizon: rank = 1 + number of strictly better combos, so ties share
the smaller rank and the next one is skipped.  A combo's average rank
is the arithmetic mean of its per-horizon ranks; the table sorts by
it and reports it to two decimals.
"""

from dataclasses import dataclass

import numpy as np


def competition_ranks(values, higher_better: bool = True) -> list[int]:
    """1-based ranks where ties share the smaller rank and skip the next."""
    vals = [float(v) for v in values]
    if higher_better:
        return [1 + sum(o > v for o in vals) for v in vals]
    return [1 + sum(o < v for o in vals) for v in vals]


@dataclass(frozen=True)
class RankingTable:
    combos: tuple          # combo labels, input order
    horizons: tuple        # forecast horizons (days)
    r2: np.ndarray         # combos x horizons, station-averaged R2
    ranks: np.ndarray      # combos x horizons, competition ranks
    avg_rank: np.ndarray   # per combo, exact mean of per-horizon ranks
    order: tuple           # combo indices sorted by average rank
    overall_rank: np.ndarray  # competition rank of the averages

    def rounded_avg(self, index: int) -> float:
        return round(float(self.avg_rank[index]), 2)

    def rows(self):
        """Table rows in final order: (combo, per-horizon ranks, avg, overall)."""
        for idx in self.order:
            yield (
                self.combos[idx],
                [int(r) for r in self.ranks[idx]],
                self.rounded_avg(idx),
                int(self.overall_rank[idx]),
            )

    def to_csv(self, decimal: str = ".") -> str:
        header = ["combo"] + [f"rank_h{h}" for h in self.horizons] + [
            "average_rank", "overall_rank",
        ]
        lines = [",".join(header)]
        for combo, ranks, avg, overall in self.rows():
            avg_text = f"{avg:.2f}"
            if decimal != ".":
                avg_text = avg_text.replace(".", decimal)
                avg_text = f'"{avg_text}"' if decimal == "," else avg_text
            cells = [combo] + [str(r) for r in ranks] + [avg_text, str(overall)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def build_ranking(r2_grid: dict, horizons=None) -> RankingTable:
    """Rank combos from a {combo: {horizon: mean R2}} grid.

    The grid must be complete; a missing cell raises ``ValueError``
    naming the combo and horizon.  Ranks and final row order are a pure
    function of the values and labels: permuting the combo insertion
    order changes neither.
    """
    combos = tuple(r2_grid.keys())
    if not combos:
        raise ValueError("empty R2 grid")
    if horizons is None:
        horizons = tuple(sorted(next(iter(r2_grid.values())).keys()))
    else:
        horizons = tuple(horizons)
    r2 = np.empty((len(combos), len(horizons)))
    for i, combo in enumerate(combos):
        for j, h in enumerate(horizons):
            if h not in r2_grid[combo]:
                raise ValueError(f"missing R2 for combo {combo!r} at horizon {h}")
            r2[i, j] = float(r2_grid[combo][h])
    ranks = np.empty_like(r2, dtype=int)
    for j in range(len(horizons)):
        ranks[:, j] = competition_ranks(r2[:, j], higher_better=True)
    avg = ranks.mean(axis=1)
    # tie-break row order by label so the table never depends on the
    # order combos were inserted into the grid
    order = tuple(sorted(range(len(combos)), key=lambda i: (avg[i], combos[i])))
    overall = np.array(competition_ranks(avg, higher_better=False))
    return RankingTable(
        combos=combos,
        horizons=horizons,
        r2=r2,
        ranks=ranks,
        avg_rank=avg,
        order=order,
        overall_rank=overall,
    )
