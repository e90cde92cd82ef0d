"""Positive and negative association-rule mining over incident transactions.

Items that occur in nearly every transaction (low inverse document frequency)
or almost never (high IDF - typically typos and placeholder residue) are
removed through an IDF band before mining. Frequent itemsets yield positive
rules A=>B; negative rules (A=>!B, !A=>B, !A=>!B) are additionally built from
the infrequent itemsets, since rarely co-occurring items are often the
semantically loaded ones.

The candidate universe is the full itemset lattice over band-passing items up
to ``max_itemset_size``; the IDF band is the knob that keeps that universe
tractable on real corpora. All metrics reduce to integer transaction counts,
so two independent counting strategies produce bit-identical fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from io import StringIO
from itertools import combinations
from typing import Iterable, Sequence

import csv

import numpy as np

from . import _kernels
from .corpus import Transaction
from .errors import IncmineError


class RulesError(IncmineError):
    pass


# NAR completeness requires the full itemset lattice over band-passing items;
# refuse instead of hanging when the band leaves it intractable
MAX_LATTICE_CANDIDATES = 5_000_000


class EmptyTransactionListError(RulesError):
    pass


class ItemAbsentError(RulesError):
    pass


class UndefinedConfidenceError(RulesError):
    """P(antecedent event) = 0, confidence has no value."""


class UndefinedLiftError(RulesError):
    """P(consequent event) = 0, lift has no value."""


@dataclass(frozen=True)
class Itemset:
    items: tuple[str, ...]

    def __init__(self, items: Iterable[str]):
        norm = tuple(sorted(set(items)))
        if not norm:
            raise ValueError("itemset may not be empty")
        object.__setattr__(self, "items", norm)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def label(self) -> str:
        return "+".join(self.items)


@dataclass(frozen=True)
class RuleMetrics:
    support: float
    confidence: float
    lift: float


@dataclass(frozen=True)
class Rule:
    antecedent: Itemset
    consequent: Itemset
    neg_antecedent: bool
    neg_consequent: bool
    metrics: RuleMetrics

    @property
    def is_par(self) -> bool:
        return not self.neg_antecedent and not self.neg_consequent

    def key(self):
        """Identity without metrics, for set comparisons."""
        return (self.antecedent.items, self.consequent.items,
                self.neg_antecedent, self.neg_consequent)


@dataclass(frozen=True)
class MiningConfig:
    minsupp: float = 0.05
    mincnf: float = 0.6
    idf_min: float = 0.0
    idf_max: float = math.inf
    max_itemset_size: int = 4
    require_lift_gt1: bool = True

    def __post_init__(self):
        if not 0.0 < self.minsupp <= 1.0:
            raise ValueError("minsupp must be in (0, 1]")
        if not 0.0 < self.mincnf <= 1.0:
            raise ValueError("mincnf must be in (0, 1]")
        if self.idf_min < 0.0:
            raise ValueError("idf_min must be >= 0")
        if not self.idf_max > self.idf_min:
            raise ValueError("idf_max must be > idf_min")
        if self.max_itemset_size < 1:
            raise ValueError("max_itemset_size must be >= 1")


def _check_transactions(transactions: Sequence[Transaction]):
    if len(transactions) == 0:
        raise EmptyTransactionListError("transaction list is empty")


def support(itemset: Itemset | Iterable[str], transactions: Sequence[Transaction]) -> float:
    """Fraction of transactions containing every item of the set."""
    _check_transactions(transactions)
    items = set(itemset)
    hits = sum(1 for t in transactions if items <= t.items)
    return hits / len(transactions)


def idf(item: str, transactions: Sequence[Transaction]) -> float:
    """Natural log of |T| / document-frequency(item)."""
    _check_transactions(transactions)
    df = sum(1 for t in transactions if item in t.items)
    if df == 0:
        raise ItemAbsentError(f"item {item!r} occurs in no transaction")
    return math.log(len(transactions) / df)


def rule_metrics(antecedent: Itemset, consequent: Itemset,
                 neg_antecedent: bool, neg_consequent: bool,
                 transactions: Sequence[Transaction]) -> RuleMetrics:
    """Support / confidence / lift of the rule, events negated per the flags.

    Counts each event directly over the transactions, one pass.
    """
    _check_transactions(transactions)
    a_items = set(antecedent)
    b_items = set(consequent)
    if a_items & b_items:
        raise ValueError("antecedent and consequent must be disjoint")
    n = len(transactions)
    count_a = count_b = count_both = 0
    for t in transactions:
        ev_a = (a_items <= t.items) != neg_antecedent
        ev_b = (b_items <= t.items) != neg_consequent
        count_a += ev_a
        count_b += ev_b
        count_both += ev_a and ev_b
    if count_a == 0:
        raise UndefinedConfidenceError("antecedent event has probability 0")
    if count_b == 0:
        raise UndefinedLiftError("consequent event has probability 0")
    supp = count_both / n
    p_a = count_a / n
    p_b = count_b / n
    return RuleMetrics(support=supp, confidence=supp / p_a, lift=supp / (p_a * p_b))


def _presence_matrix(transactions: Sequence[Transaction], items: Sequence[str]):
    pos = {item: j for j, item in enumerate(items)}
    presence = np.zeros((len(transactions), len(items)), dtype=np.bool_)
    for i, t in enumerate(transactions):
        for item in t.items:
            j = pos.get(item)
            if j is not None:
                presence[i, j] = True
    return presence


def _level_counts(presence, level_tuples):
    """Support counts for index-tuples of one size, via the counting kernel."""
    cands = np.array(level_tuples, dtype=np.int64)
    return _kernels.support_counts(presence, cands)


def apriori_frequent(transactions: Sequence[Transaction], minsupp: float,
                     max_size: int = 4) -> list[tuple[Itemset, float]]:
    """All itemsets up to ``max_size`` with support >= minsupp (inclusive).

    Level-wise generation with candidate pruning: a size-k candidate is only
    counted when all its (k-1)-subsets are frequent.
    """
    _check_transactions(transactions)
    n = len(transactions)
    items = sorted({item for t in transactions for item in t.items})
    if not items:
        return []
    presence = _presence_matrix(transactions, items)

    out: list[tuple[Itemset, float]] = []
    level = [(j,) for j in range(len(items))]
    size = 1
    while level and size <= max_size:
        counts = _level_counts(presence, level)
        frequent_now = set()
        for tup, cnt in zip(level, counts):
            supp = int(cnt) / n
            if supp >= minsupp:
                frequent_now.add(tup)
                out.append((Itemset(items[j] for j in tup), supp))
        if not frequent_now or size == max_size:
            break
        ordered = sorted(frequent_now)
        candidates = []
        for i, a in enumerate(ordered):
            for b in ordered[i + 1:]:
                if a[:-1] != b[:-1]:
                    break  # ordered join: shared (k-1)-prefix required
                cand = a + (b[-1],)
                if all(tuple(sub) in frequent_now
                       for sub in combinations(cand, size)):
                    candidates.append(cand)
        level = candidates
        size += 1
    out.sort(key=lambda pair: (len(pair[0].items), pair[0].items))
    return out


def fisinfis_mine(transactions: Sequence[Transaction],
                  config: MiningConfig) -> list[Rule]:
    """Mine PARs from frequent itemsets and NARs from the full IDF-band lattice.

    Steps: (1) drop items whose IDF falls outside [idf_min, idf_max];
    (2) enumerate every itemset of band-passing items up to max_itemset_size
    and split it into frequent (support >= minsupp) and infrequent;
    (3) each 2-partition (A, B) of a frequent itemset yields A=>B when its
    confidence reaches mincnf and lift exceeds 1; (4) partitions of all
    itemsets, frequent or not, yield the three negated forms under the same
    thresholds applied to the negated events; (5) rules are ordered by lift
    desc, confidence desc, then lexicographically.
    """
    _check_transactions(transactions)
    n = len(transactions)

    all_items = sorted({item for t in transactions for item in t.items})
    kept = []
    for item in all_items:
        value = idf(item, transactions)
        if config.idf_min <= value <= config.idf_max:
            kept.append(item)
    if not kept:
        return []

    presence = _presence_matrix(transactions, kept)
    max_size = min(config.max_itemset_size, len(kept))

    total_candidates = sum(math.comb(len(kept), size)
                           for size in range(1, max_size + 1))
    if total_candidates > MAX_LATTICE_CANDIDATES:
        raise RulesError(
            f"{len(kept)} items pass the IDF band, giving {total_candidates} "
            f"candidate itemsets up to size {max_size}; tighten the band or "
            f"lower max_itemset_size")

    # full lattice over kept items: count/(n) supports per index-tuple
    counts: dict[tuple[int, ...], int] = {}
    for size in range(1, max_size + 1):
        level = list(combinations(range(len(kept)), size))
        level_counts = _level_counts(presence, level)
        for tup, cnt in zip(level, level_counts):
            counts[tup] = int(cnt)

    rules: list[Rule] = []
    for x, c_x in counts.items():
        if len(x) < 2:
            continue
        x_frequent = (c_x / n) >= config.minsupp
        # every ordered 2-partition (A, X\A)
        for r in range(1, len(x)):
            for a in combinations(x, r):
                b = tuple(j for j in x if j not in a)
                c_a = counts[a]
                c_b = counts[b]
                for neg_a, neg_b in ((False, False), (False, True),
                                     (True, False), (True, True)):
                    if not neg_a and not neg_b and not x_frequent:
                        continue
                    ev_a = n - c_a if neg_a else c_a
                    ev_b = n - c_b if neg_b else c_b
                    if ev_a == 0 or ev_b == 0:
                        continue  # confidence or lift undefined
                    if neg_a and neg_b:
                        both = n - c_a - c_b + c_x
                    elif neg_a:
                        both = c_b - c_x
                    elif neg_b:
                        both = c_a - c_x
                    else:
                        both = c_x
                    supp = both / n
                    if supp < config.minsupp:
                        continue
                    p_a = ev_a / n
                    p_b = ev_b / n
                    conf = supp / p_a
                    if conf < config.mincnf:
                        continue
                    lift = supp / (p_a * p_b)
                    if config.require_lift_gt1 and not lift > 1.0:
                        continue
                    rules.append(Rule(
                        antecedent=Itemset(kept[j] for j in a),
                        consequent=Itemset(kept[j] for j in b),
                        neg_antecedent=neg_a,
                        neg_consequent=neg_b,
                        metrics=RuleMetrics(support=supp, confidence=conf, lift=lift),
                    ))

    rules.sort(key=lambda rule: (
        -rule.metrics.lift, -rule.metrics.confidence,
        rule.antecedent.items, rule.consequent.items,
        rule.neg_antecedent, rule.neg_consequent,
    ))
    return rules


def rules_to_csv(rules: Sequence[Rule]) -> str:
    """CSV with '+'-joined itemsets, 0/1 negation flags and 6-decimal metrics."""
    buf = StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["antecedent", "consequent", "neg_a", "neg_c",
                     "support", "confidence", "lift"])
    for rule in rules:
        writer.writerow([
            rule.antecedent.label(),
            rule.consequent.label(),
            int(rule.neg_antecedent),
            int(rule.neg_consequent),
            f"{rule.metrics.support:.6f}",
            f"{rule.metrics.confidence:.6f}",
            f"{rule.metrics.lift:.6f}",
        ])
    return buf.getvalue()


def _node_label(itemset: Itemset, negated: bool) -> str:
    return ("¬" if negated else "") + itemset.label()


def export_rule_graph(rules: Sequence[Rule]) -> str:
    """Directed GraphViz DOT text; NAR edges dashed, negated sides prefixed.

    Output is byte-stable: nodes and edges are emitted in sorted order.
    """
    nodes: set[str] = set()
    edges: list[tuple[str, str, str, bool]] = []
    for rule in rules:
        tail = _node_label(rule.antecedent, rule.neg_antecedent)
        head = _node_label(rule.consequent, rule.neg_consequent)
        nodes.add(tail)
        nodes.add(head)
        label = (f"s={rule.metrics.support:.3f} "
                 f"c={rule.metrics.confidence:.3f} "
                 f"l={rule.metrics.lift:.3f}")
        edges.append((tail, head, label, not rule.is_par))
    def quote(name: str) -> str:
        return '"' + name.replace('"', '\\"') + '"'

    lines = ["digraph rules {"]
    for node in sorted(nodes):
        lines.append(f"  {quote(node)};")
    for tail, head, label, dashed in sorted(edges):
        style = ", style=dashed" if dashed else ""
        lines.append(f'  {quote(tail)} -> {quote(head)} [label="{label}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
