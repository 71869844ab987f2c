"""Grammar quality measurement: precision, recall, F1, size metrics.

Precision samples the inferred grammar and asks the oracle; duplicates
count per draw.  Recall tokenizes each golden program with the grammar's
own token table (longest match; a program the lexer cannot segment counts
as a miss, like a parser rejecting at the lexer) and then runs the chart
recognizer.  Ratios are kept as exact fractions so the harmonic-mean
identity holds without rounding, and reports serialize losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .grammar import CharClass, Grammar, GrammarMetrics, Lit, membership, metrics
from .oracle import Oracle, OracleError
from .rng import Rng, derive_seed
from .sampler import SamplerSpec, sample
from .tokenizer import join_pieces


class EvalError(Exception):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


# ---------------------------------------------------------------------------
# golden-program tokenization


def tokenize_with_table(g: Grammar, text: str):
    """Lex a golden program against the grammar's lexical layer.

    Longest match over token literal values, token character classes and
    the grammar's literal terminals; at equal length a literal value beats
    a class run (keywords stay reserved), then the earlier table entry
    wins.  Returns None when some position cannot be matched.
    """
    table = g.table
    entries = list(table.entries.items()) if table is not None else []
    lits = sorted(
        {s.text for p in g.productions for s in p.rhs if isinstance(s, Lit)},
        key=lambda t: (-len(t), t),
    )
    skip_ws = not (table.whitespace_sensitive if table is not None else False)
    out = []
    pos, n = 0, len(text)
    while pos < n:
        if skip_ws and text[pos] in " \t\r\n":
            pos += 1
            continue
        best = None  # (-length, priority, order, element)
        for order, (tid, entry) in enumerate(entries):
            for v in entry.values:
                if text.startswith(v, pos):
                    cand = (-len(v), 0, order, tid)
                    if best is None or cand < best:
                        best = cand
            if entry.ranges:
                cc = CharClass(entry.ranges, entry.repeatable)
                run = 0
                limit = n - pos if entry.repeatable else min(1, n - pos)
                while run < limit and cc.contains_char(text[pos + run]):
                    run += 1
                if run:
                    cand = (-run, 2, order, tid)
                    if best is None or cand < best:
                        best = cand
        for lit in lits:
            if text.startswith(lit, pos):
                cand = (-len(lit), 1, 0, lit)
                if best is None or cand < best:
                    best = cand
                break
        if best is None:
            return None
        out.append(best[3])
        pos += -best[0]
    return out


# ---------------------------------------------------------------------------
# measures


def precision(
    g: Grammar, oracle: Oracle, spec: SamplerSpec, n: int, rng: Rng | int
) -> Fraction:
    if not isinstance(rng, Rng):
        rng = Rng(rng)
    accepted = 0
    for i in range(n):
        try:
            ok = oracle.check(sample(g, spec, rng))
        except OracleError as e:
            raise EvalError(
                f"oracle failed after {i} samples ({accepted} accepted): {e}",
                partial=(accepted, i),
            ) from e
        if ok:
            accepted += 1
    return Fraction(accepted, n)


def recall(g: Grammar, golden: list[str]) -> Fraction:
    if not golden:
        raise EvalError("empty golden corpus")
    parsed = 0
    for prog in golden:
        toks = tokenize_with_table(g, prog)
        if toks is not None and membership(g, toks):
            parsed += 1
    return Fraction(parsed, len(golden))


def recall_misses(g: Grammar, golden: list[str]) -> list[str]:
    out = []
    for prog in golden:
        toks = tokenize_with_table(g, prog)
        if toks is None or not membership(g, toks):
            out.append(prog)
    return out


def f1_score(p: Fraction, r: Fraction) -> Fraction:
    if p + r == 0:
        return Fraction(0)
    return 2 * p * r / (p + r)


@dataclass
class EvalReport:
    precision: Fraction
    recall: Fraction
    f1: Fraction
    metrics: GrammarMetrics
    sampler: str
    seed: int
    samples_drawn: int
    samples_accepted: int
    golden_total: int
    golden_parsed: int
    oracle_queries: int
    oracle_time: float
    oracle_cache_hits: int

    def to_dict(self) -> dict:
        return {
            "precision": str(self.precision),
            "precision_value": float(self.precision),
            "recall": str(self.recall),
            "recall_value": float(self.recall),
            "f1": str(self.f1),
            "f1_value": float(self.f1),
            "metrics": {
                "nt_count": self.metrics.nt_count,
                "terminal_count": self.metrics.terminal_count,
                "alternatives": self.metrics.alternatives,
                "avg_rule_len": str(self.metrics.avg_rule_len),
                "size_sum": self.metrics.size_sum,
            },
            "sampler": self.sampler,
            "seed": self.seed,
            "samples_drawn": self.samples_drawn,
            "samples_accepted": self.samples_accepted,
            "golden_total": self.golden_total,
            "golden_parsed": self.golden_parsed,
            "oracle": {
                "queries": self.oracle_queries,
                "oracle_time": self.oracle_time,
                "cache_hits": self.oracle_cache_hits,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        m = d["metrics"]
        return cls(
            precision=Fraction(d["precision"]),
            recall=Fraction(d["recall"]),
            f1=Fraction(d["f1"]),
            metrics=GrammarMetrics(
                nt_count=m["nt_count"],
                terminal_count=m["terminal_count"],
                alternatives=m["alternatives"],
                avg_rule_len=Fraction(m["avg_rule_len"]),
                size_sum=m["size_sum"],
            ),
            sampler=d["sampler"],
            seed=d["seed"],
            samples_drawn=d["samples_drawn"],
            samples_accepted=d["samples_accepted"],
            golden_total=d["golden_total"],
            golden_parsed=d["golden_parsed"],
            oracle_queries=d["oracle"]["queries"],
            oracle_time=d["oracle"]["oracle_time"],
            oracle_cache_hits=d["oracle"]["cache_hits"],
        )

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_dict(json.loads(text))


def report(
    g: Grammar,
    oracle: Oracle,
    golden: list[str],
    spec: SamplerSpec,
    n: int,
    seed: int = 0,
) -> EvalReport:
    rng = Rng(derive_seed(seed, 0xE7A1))
    p = precision(g, oracle, spec, n, rng)
    r = recall(g, golden)
    st = oracle.stats()
    return EvalReport(
        precision=p,
        recall=r,
        f1=f1_score(p, r),
        metrics=metrics(g),
        sampler=spec.label(),
        seed=seed,
        samples_drawn=n,
        samples_accepted=int(p * n),
        golden_total=len(golden),
        golden_parsed=int(r * len(golden)),
        oracle_queries=st.queries,
        oracle_time=st.oracle_time,
        oracle_cache_hits=st.cache_hits,
    )
