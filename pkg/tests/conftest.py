import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from incmine.corpus import Corpus, Provenance, RawRecord, Transaction


@pytest.fixture
def toy_transactions():
    """Three {a,b} transactions and one {c}."""
    return [
        Transaction("t0", frozenset({"a", "b"})),
        Transaction("t1", frozenset({"a", "b"})),
        Transaction("t2", frozenset({"a", "b"})),
        Transaction("t3", frozenset({"c"})),
    ]


def make_corpus(rows):
    """Build a Corpus directly from (id, dynamics, consequence) tuples."""
    records = tuple(RawRecord(id=r[0], dynamics=r[1],
                              consequence=r[2] if len(r) > 2 else "")
                    for r in rows)
    return Corpus(records=records,
                  provenance=Provenance(source="fixture", loaded_at=0.0, dropped=0))


@pytest.fixture
def corpus_csv(tmp_path):
    """Factory writing a corpus CSV and returning its path."""
    def _write(rows, name="corpus.csv"):
        path = tmp_path / name
        lines = ["id,dynamics,consequence"]
        for row in rows:
            fields = list(row) + [""] * (3 - len(row))
            lines.append(",".join(_csv_quote(f) for f in fields))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)
    return _write


def _csv_quote(field):
    if any(ch in field for ch in ',"\n'):
        return '"' + field.replace('"', '""') + '"'
    return field


FIXTURE_ROWS = [
    ("r01", "operaio scivola su scala bagnata", "frattura gamba"),
    ("r02", "taglio con lama affilata durante lavorazione", "lacerazione mano"),
    ("r03", "caduta da ponteggio alto", "contusione spalla"),
    ("r04", "urto contro carrello elevatore", "trauma cranico"),
    ("r05", "schiacciamento mano sotto pressa", "amputazione dita"),
    ("r06", "ustione da metallo fuso in fonderia", "ustione braccio"),
    ("r07", "inalazione fumi densi saldatura", "intossicazione vie"),
    ("r08", "contatto con cavo elettrico scoperto", "folgorazione lieve"),
    ("r09", "scivola su pavimento bagnato officina", "frattura polso"),
    ("r10", "caduta scala durante manutenzione", "contusione schiena"),
    ("r11", "taglio lama su banco lavorazione", "lacerazione dita"),
    ("r12", "urto carrello in retromarcia", "trauma lieve"),
]


@pytest.fixture
def fixture_corpus_path(corpus_csv):
    return corpus_csv(FIXTURE_ROWS)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
