#!/usr/bin/env python3
"""Build the bundled demo corpus and recorded model fixtures.

Produces, under fixtures/:
  corpus/            catalog, questions, source pages, ground truth,
                     transcripts for three systems, recorded model fixtures
  kg/after_2.json    store snapshot after two replayed questions
  kg/after_20.json   store snapshot after the full replayed run

The corpus is engineered so that a clean replay reproduces exact checkpoint
statistics (57/114/19 -> 141/356/23 -> 226/420/36), the causal neighborhood
of "pneumonia" after two questions is exactly four edges of three relation
types, and the bundled transcripts evaluate to fixed hallucination and
incompleteness totals (35/49/129 and 54/49). Every target is verified here
with the real pipeline before the files are frozen.
"""

from __future__ import annotations

import json
import os
import shutil
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from kgil import store as kgstore
from kgil.evaluation import (
    GroundTruthDoc,
    SystemSpec,
    completeness,
    run_eval,
    transcript_source,
    truth_check_deterministic,
)
from kgil.gateway import GatewayConfig
from kgil.learning import causal_subgraph
from kgil.orchestrator import Engine, EngineConfig
from kgil.retrieval import url_fixture_name
from kgil.store import normalize_text

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
FIXTURES_DIR = os.path.join(ROOT, "fixtures")

CHECKPOINT_TARGETS = {2: (57, 114, 19), 10: (141, 356, 23), 20: (226, 420, 36)}

EXPECTED_CAUSAL_AFTER_2 = {
    ("pneumonia", "causes", "chest pain"),
    ("pneumonia", "causes", "rsv"),
    ("pneumonia", "caused by", "infection"),
    ("infection", "may cause", "aspiration pneumonia"),
}

DISEASES = [
    ("pneumonia", "Pneumonia"),
    ("flu", "Flu"),
    ("covid-19", "COVID-19"),
    ("rsv", "RSV"),
    ("chest infection", "Chest Infection"),
    ("bronchitis", "Bronchitis"),
    ("asthma", "Asthma"),
    ("common cold", "Common Cold"),
    ("tonsillitis", "Tonsillitis"),
    ("acne", "Acne"),
]

SYMPTOM_QUESTION = "What are the symptoms of {name} and how can it be prevented?"
CAUSE_QUESTION = "What are the causes of {name} and its treatment?"

# Per-question batch targets: (triples, new terms). Relation types are set
# by PREDICATE_SCHEDULE. Sums hit the checkpoint deltas exactly.
BATCH_TARGETS = [
    (57, 29), (57, 28),
    (32, 11), (32, 11), (31, 11), (31, 11), (30, 10), (30, 10), (28, 10), (28, 10),
    (7, 9), (7, 9), (7, 9), (7, 8), (6, 9), (6, 8), (6, 9), (6, 8), (6, 8), (6, 8),
]

PREDICATE_SCHEDULE = {
    1: ["has symptom", "prevented by", "causes", "includes", "affects",
        "recommended for", "reduces risk of", "described as", "spread by",
        "has risk factor"],
    2: ["caused by", "may cause", "treated with", "diagnosed with", "relieves",
        "worsens", "requires", "managed by", "lasts"],
    3: ["eased by", "tested with"],
    5: ["vaccinated against"],
    7: ["monitored with"],
    11: ["inhaled via", "triggered by"],
    12: ["avoided by"],
    13: ["measured by"],
    14: ["controlled with"],
    15: ["soothed by"],
    16: ["shortened by"],
    17: ["examined by"],
    18: ["gargled with"],
    19: ["cleansed with", "applied to"],
    20: ["graded as", "scarred by"],
}

CAUSAL = {"causes", "caused by", "may cause"}

# Curated signature facts per question (label-cased). Causal content is only
# what the checkpoint story requires.
CURATED = {
    1: [
        ("Pneumonia", "causes", "Chest Pain"),
        ("Pneumonia", "causes", "RSV"),
        ("Pneumonia", "has symptom", "Chesty Cough"),
        ("Pneumonia", "has symptom", "High Temperature"),
        ("Pneumonia", "prevented by", "Pneumococcal Vaccine"),
    ],
    2: [
        ("Pneumonia", "caused by", "Infection"),
        ("Infection", "may cause", "Aspiration Pneumonia"),
        ("Pneumonia", "treated with", "Antibiotics"),
        ("Pneumonia", "diagnosed with", "Chest X-Ray"),
    ],
    3: [("Flu", "has symptom", "Spiking Fever")],
    4: [("Flu", "may cause", "Pneumonia"), ("Flu", "treated with", "Bed Rest")],
    5: [("COVID-19", "has symptom", "Loss of Smell")],
    6: [("COVID-19", "may cause", "Pneumonia"), ("COVID-19", "treated with", "Antiviral Tablets")],
    7: [("RSV", "has symptom", "Wheezy Breathing")],
    8: [("RSV", "causes", "Bronchiolitis"), ("RSV", "treated with", "Supportive Care")],
    9: [("Chest Infection", "has symptom", "Rattly Chest")],
    10: [
        ("Chest Infection", "causes", "Pneumonia"),
        ("Chest Infection", "may cause", "Chest Pain"),
    ],
    11: [("Bronchitis", "has symptom", "Hacking Cough")],
    12: [("Bronchitis", "treated with", "Honey Drinks")],
    13: [("Asthma", "has symptom", "Tight Chest")],
    14: [("Asthma", "controlled with", "Preventer Inhaler")],
    15: [("Common Cold", "has symptom", "Runny Nose")],
    16: [("Common Cold", "treated with", "Decongestant Drops")],
    17: [("Tonsillitis", "has symptom", "Sore Throat")],
    18: [("Tonsillitis", "treated with", "Penicillin Course")],
    19: [("Acne", "has symptom", "Oily Skin")],
    20: [("Acne", "treated with", "Retinoid Cream")],
}

# Filler-term grids. Dimensions are coprime so the diagonal walk below
# yields the full cross product with both coordinates changing every step;
# consecutive draws never share a qualifier or a noun.
QUALIFIERS = [
    "mild", "severe", "persistent", "sudden", "dull", "sharp", "seasonal",
    "nighttime", "morning", "frequent", "brief", "lingering", "tender",
    "patchy", "intense", "gradual",
]  # 16
NOUNS = [
    "headache", "fatigue", "congestion", "sneezing", "dizziness", "shivering",
    "hoarseness", "drowsiness", "appetite loss", "muscle soreness",
    "breathlessness", "irritability", "dry throat", "watery eyes",
    "skin flushing", "ear pressure", "joint stiffness", "night sweats",
    "nasal drip", "chest tightness", "light sensitivity",
]  # 21
REMEDY_QUALIFIERS = [
    "warm", "cool", "saline", "herbal", "medicated", "gentle", "soothing",
    "steamy", "diluted", "chilled", "fragrant", "simple",
]  # 12
REMEDY_NOUNS = [
    "compress", "lozenge", "nasal rinse", "vapour rub", "broth", "tea blend",
    "ointment", "syrup", "gargle mix", "balm", "humidifier", "footbath",
    "throat spray", "eye mask", "pillow wedge", "room fan", "window vent",
]  # 17

# Verbalization phrasings. Pools are pairwise disjoint on content words so
# two ground-truth items never share vocabulary through their verb phrases;
# that keeps the item-level completeness matching exact.
PHRASES = {
    "has symptom": ["commonly presents with", "often features", "typically involves",
                    "frequently brings", "regularly shows", "routinely surfaces as"],
    "prevented by": ["is warded off by", "is deterred through"],
    "causes": ["can cause", "leads on to"],
    "caused by": ["is rooted in", "develops out of"],
    "may cause": ["can spark", "occasionally provokes"],
    "includes": ["extends to", "encompasses"],
    "affects": ["burdens", "weighs on"],
    "recommended for": ["suits", "benefits"],
    "reduces risk of": ["cuts the odds of", "dials back"],
    "described as": ["resembles", "feels akin to"],
    "spread by": ["travels via", "hops between households by"],
    "has risk factor": ["grows likelier alongside", "climbs when paired against"],
    "treated with": ["is treated with", "settles under", "clears up after"],
    "diagnosed with": ["is pinpointed by", "is confirmed through"],
    "relieves": ["relieves", "eases"],
    "worsens": ["worsens", "aggravates"],
    "requires": ["requires", "calls for"],
    "managed by": ["is steered by", "is kept steady by"],
    "lasts": ["drags on for", "runs its course over"],
    "eased by": ["softens with", "mellows under"],
    "tested with": ["is screened by", "is sampled through"],
    "vaccinated against": ["is immunised by", "is inoculated through"],
    "monitored with": ["is watched over with", "is charted using"],
    "inhaled via": ["is puffed in through", "is drawn in by"],
    "triggered by": ["flares after", "kicks off following"],
    "avoided by": ["is dodged by", "is skirted through"],
    "measured by": ["is gauged by", "is sized up with"],
    "controlled with": ["stays level on", "is reined in with"],
    "soothed by": ["calms under", "quiets down with"],
    "shortened by": ["wraps up sooner with", "finishes earlier on"],
    "examined by": ["gets inspected by", "is reviewed by"],
    "gargled with": ["responds to gargling", "improves after gargling"],
    "cleansed with": ["is lathered with", "is rinsed in"],
    "applied to": ["is dabbed onto", "is smoothed over"],
    "graded as": ["is ranked as", "is bucketed as"],
    "scarred by": ["can leave behind", "may mark skin with"],
}

FABRICATIONS = [
    "Crystal healing sessions restore inner balance within days.",
    "Daily horoscope alignment speeds up every recovery.",
    "Moonlight walks recharge depleted energy meridians.",
    "A juice cleanse sweeps negativity from the bloodstream.",
    "Aromatherapy candles neutralise airborne toxins instantly.",
    "Magnetic bracelets realign the body's polarity overnight.",
    "Detox tonics dissolve ailments before breakfast.",
    "Barefoot grounding transfers earth currents into the spine.",
    "Copper rings draw illness out through the fingertips.",
    "Chanting at dawn strengthens the aura against germs.",
    "Salt lamps purify the bedroom of stubborn maladies.",
    "Mercury retrograde explains most stubborn relapses.",
    "An amethyst under the mattress shortens any illness.",
    "Icy showers at midnight reset the immune clock.",
    "Feng shui furniture placement deflects wandering bugs.",
    "Palm readings reveal the true date of recovery.",
]

HALLU_PLAN = {
    "rag-kg-il": [2] * 15 + [1] * 5,
    "rag-only": [4, 3, 3, 3, 2, 2, 2, 2, 2, 2, 3, 2, 3, 2, 3, 2, 3, 2, 3, 1],
    "baseline-llm": [7, 7, 6, 6, 13] + [6] * 15,
}
MISSING_PLAN = {
    "rag-kg-il": [1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0],
    "rag-only": [4, 3, 2, 2, 4, 2, 3, 2, 2, 4, 2, 3, 2, 2, 4, 2, 3, 2, 2, 4],
    "baseline-llm": [4, 4, 0, 3, 3, 3, 3, 3, 3, 3, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2],
}
FABRICATION_OFFSET = {"rag-kg-il": 0, "rag-only": 2, "baseline-llm": 1}

EXPECTED_TOTALS = {
    "hallucinations": {"rag-kg-il": 35, "rag-only": 49, "baseline-llm": 129},
    "missing": {"rag-only": 54, "baseline-llm": 49},
}


def question_list():
    questions = []
    for i, (slug, name) in enumerate(DISEASES):
        for j, template in enumerate((SYMPTOM_QUESTION, CAUSE_QUESTION)):
            number = 2 * i + j + 1
            aspect = "symptoms-prevention" if j == 0 else "causes-treatment"
            questions.append(
                {
                    "number": number,
                    "id": f"q{number:02d}",
                    "text": template.format(name=name),
                    "disease": slug,
                    "disease_label": name,
                    "url": f"https://health.example/conditions/{slug.replace(' ', '-')}/{aspect}/",
                }
            )
    return questions


class TermPool:
    """Deterministic supply of fresh two-word terms.

    Walks each grid diagonally (coprime dimensions) so neighbouring draws
    share neither qualifier nor noun; nearby ground-truth items therefore
    keep disjoint object vocabulary."""

    def __init__(self):
        self.candidates = []
        for k in range(len(QUALIFIERS) * len(NOUNS)):
            self.candidates.append(
                f"{QUALIFIERS[k % len(QUALIFIERS)]} {NOUNS[k % len(NOUNS)]}"
            )
        for k in range(len(REMEDY_QUALIFIERS) * len(REMEDY_NOUNS)):
            self.candidates.append(
                f"{REMEDY_QUALIFIERS[k % len(REMEDY_QUALIFIERS)]} "
                f"{REMEDY_NOUNS[k % len(REMEDY_NOUNS)]}"
            )
        self.cursor = 0

    def fresh(self, taken: set[str]) -> str:
        while self.cursor < len(self.candidates):
            candidate = self.candidates[self.cursor]
            self.cursor += 1
            if normalize_text(candidate) not in taken:
                return candidate
        raise RuntimeError("term pool exhausted")


def build_batches(questions):
    """Per-question triple batches hitting the (triples, terms, predicates)
    deltas exactly. Returns list of lists of (subject, predicate, object)."""
    pool = TermPool()
    known_terms: set[str] = set()
    known_keys: set[tuple[str, str, str]] = set()
    known_preds: list[str] = []
    batches = []

    for q in questions:
        number = q["number"]
        target_triples, target_terms = BATCH_TARGETS[number - 1]
        new_preds = list(PREDICATE_SCHEDULE.get(number, []))
        batch: list[tuple[str, str, str]] = []
        new_terms_used = 0

        def norm_key(s, p, o):
            return (normalize_text(s), normalize_text(p), normalize_text(o))

        def admit(s, p, o):
            nonlocal new_terms_used
            key = norm_key(s, p, o)
            assert key not in known_keys, f"duplicate planned triple {key}"
            assert key[0] != key[2], f"self loop {key}"
            known_keys.add(key)
            for term in (key[0], key[2]):
                if term not in known_terms:
                    known_terms.add(term)
                    new_terms_used += 1
            norm_p = key[1]
            if norm_p not in known_preds:
                known_preds.append(norm_p)
            batch.append((s, p, o))

        for s, p, o in CURATED[number]:
            admit(s, p, o)
            if normalize_text(p) in new_preds:
                new_preds.remove(normalize_text(p))

        anchor = q["disease_label"]
        if normalize_text(anchor) not in known_terms:
            # Anchor enters with its first curated triple above; only a
            # pathological schedule could leave it missing.
            raise RuntimeError(f"anchor {anchor} not introduced by curated facts")

        # Introduce the remaining scheduled predicates, attaching new terms
        # while the term budget allows.
        for pred in new_preds:
            remaining_terms = target_terms - new_terms_used
            if remaining_terms > 0:
                admit(anchor, pred, pool.fresh(known_terms))
            else:
                existing = sorted(known_terms - {normalize_text(anchor)})
                for candidate in existing:
                    if norm_key(anchor, pred, candidate) not in known_keys:
                        admit(anchor, pred, candidate)
                        break
                else:
                    raise RuntimeError("no pad partner available")

        # Pad to the exact triple and term budgets with non-causal facts.
        pad_preds = [p for p in known_preds if p not in CAUSAL]
        pad_cursor = 0

        def next_pad_pred():
            nonlocal pad_cursor
            pred = pad_preds[pad_cursor % len(pad_preds)]
            pad_cursor += 1
            return pred

        while len(batch) < target_triples:
            slots_left = target_triples - len(batch)
            terms_left = target_terms - new_terms_used
            assert 0 <= terms_left <= 2 * slots_left, (
                f"q{number}: infeasible padding {terms_left} terms in {slots_left} slots"
            )
            if terms_left > slots_left:
                a = pool.fresh(known_terms)
                known_terms.add(normalize_text(a))
                new_terms_used += 1
                admit(a, next_pad_pred(), pool.fresh(known_terms))
            elif terms_left > 0:
                admit(anchor, next_pad_pred(), pool.fresh(known_terms))
            else:
                existing = sorted(known_terms - {normalize_text(anchor)})
                placed = False
                for candidate in existing:
                    for pred in pad_preds:
                        if norm_key(anchor, pred, candidate) not in known_keys:
                            admit(anchor, pred, candidate)
                            placed = True
                            break
                    if placed:
                        break
                if not placed:
                    raise RuntimeError(f"q{number}: no zero-term pad available")

        assert len(batch) == target_triples
        assert new_terms_used == target_terms, (
            f"q{number}: used {new_terms_used} new terms, wanted {target_terms}"
        )
        batches.append(batch)
    return batches


def verbalize(batch, items_n):
    """Turn the first items_n facts into one-sentence ground-truth items."""
    used_phrases: set[str] = set()
    items = []
    for s, p, o in batch[:items_n]:
        variants = PHRASES[normalize_text(p)]
        phrase = next((v for v in variants if v not in used_phrases), None)
        if phrase is None:
            phrase = f"{variants[0]} notably"
        used_phrases.add(phrase)
        items.append(f"{s} {phrase} {o}.")
    return items


def payload_for(batch, labels):
    node_ids = []
    for s, _p, o in batch:
        for term in (s, o):
            if term not in node_ids:
                node_ids.append(term)
    return json.dumps(
        {
            "nodes": [
                {"id": t, "label": labels.get(t, t), "size": 25, "shape": "circularImage"}
                for t in node_ids
            ],
            "edges": [
                {"source": s, "label": p, "target": o} for s, p, o in batch
            ],
        },
        indent=2,
        ensure_ascii=False,
    )


def payload_constructor_format(batch, labels):
    lines = ["nodes = []", "edges = []"]
    node_ids = []
    for s, _p, o in batch:
        for term in (s, o):
            if term not in node_ids:
                node_ids.append(term)
    for t in node_ids:
        lines.append(
            f'nodes.append(Node(id="{t}", label="{labels.get(t, t)}", size=25, '
            f'shape="circularImage"))'
        )
    for s, p, o in batch:
        lines.append(f'edges.append(Edge(source="{s}", label="{p}", target="{o}"))')
    return "\n".join(lines)


def reasoning_payload(q, batch):
    anchor = q["disease_label"]
    targets = []
    for s, _p, o in batch:
        if s == anchor and o not in targets:
            targets.append(o)
        if len(targets) == 2:
            break
    nodes = [{"id": anchor, "label": anchor, "size": 25, "shape": "circularImage"}]
    edges = []
    for s, p, o in batch:
        if s == anchor and o in targets:
            nodes.append({"id": o, "label": o, "size": 25, "shape": "circularImage"})
            edges.append({"source": s, "label": p, "target": o})
    return json.dumps({"nodes": nodes, "edges": edges}, indent=2, ensure_ascii=False)


def compose_answer(items, missing_count, fabrication_count, offset):
    included = items[: len(items) - missing_count] if missing_count else list(items)
    fabs = [FABRICATIONS[(offset + i) % len(FABRICATIONS)] for i in range(fabrication_count)]
    assert len(set(fabs)) == len(fabs), "fabrication slice repeats a sentence"
    return "\n".join(included + fabs)


class RecordScript:
    """Transport used while recording: per-template response queues."""

    def __init__(self, queues):
        self.queues = {k: list(v) for k, v in queues.items()}

    def __call__(self, body):
        system = body["messages"][0]["content"]
        markers = {
            "data_selection": "You are a web link search engine",
            "fusion_answer": "Knowledge Graph data and generated text data",
            "graph_output": "First summerise the keywords",
            "graph_update": "relationships between medical terms and key sentences",
        }
        for name, marker in markers.items():
            if marker in system:
                queue = self.queues[name]
                if not queue:
                    raise RuntimeError(f"script exhausted for {name}")
                return queue.pop(0), "scripted"
        raise RuntimeError("unrecognized prompt")


def write_corpus(corpus_dir, questions, gt_items, transcripts):
    os.makedirs(os.path.join(corpus_dir, "sources"), exist_ok=True)
    os.makedirs(os.path.join(corpus_dir, "ground_truth"), exist_ok=True)
    catalog = [
        {"url": q["url"], "title": f"{q['disease_label']} - {q['id']}"}
        for q in questions
    ]
    catalog += [
        {"url": "https://health.example/conditions/verrucas/overview/", "title": "Verrucas"},
        {"url": "https://health.example/conditions/chilblains/overview/", "title": "Chilblains"},
    ]
    with open(os.path.join(corpus_dir, "catalog.json"), "w", encoding="utf-8") as fh:
        json.dump(catalog, fh, indent=2, ensure_ascii=False)
        fh.write("\n")

    questions_doc = [
        {
            "id": q["id"],
            "text": q["text"],
            "source_urls": [q["url"]],
            "ground_truth_file": f"{q['id']}.txt",
        }
        for q in questions
    ]
    with open(os.path.join(corpus_dir, "questions.json"), "w", encoding="utf-8") as fh:
        json.dump(questions_doc, fh, indent=2, ensure_ascii=False)
        fh.write("\n")

    for q in questions:
        items = gt_items[q["id"]]
        gt_path = os.path.join(corpus_dir, "ground_truth", f"{q['id']}.txt")
        with open(gt_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(items) + "\n")
        lis = "\n".join(f"  <li>{item}</li>" for item in items)
        html = (
            f"<html><head><title>{q['disease_label']}</title></head>\n"
            f"<body>\n<h1>{q['disease_label']}</h1>\n<ul>\n{lis}\n</ul>\n"
            f"</body></html>\n"
        )
        source_path = os.path.join(corpus_dir, "sources", url_fixture_name(q["url"]))
        with open(source_path, "w", encoding="utf-8") as fh:
            fh.write(html)

    for system, answers in transcripts.items():
        directory = os.path.join(corpus_dir, "transcripts", system)
        os.makedirs(directory, exist_ok=True)
        for qid, text in answers.items():
            with open(os.path.join(directory, f"{qid}.txt"), "w", encoding="utf-8") as fh:
                fh.write(text + "\n")


def normalize_fixture_latencies(fixture_dir):
    for name in sorted(os.listdir(fixture_dir)):
        path = os.path.join(fixture_dir, name)
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        doc["response"]["latency"] = 0.0
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, ensure_ascii=False)
            fh.write("\n")


def run_pipeline(corpus_dir, fixture_dir, kg_path, questions, mode, transport=None,
                 snapshot_numbers=(), snapshot_dir=None):
    config = EngineConfig(
        corpus_dir=corpus_dir,
        kg_path=kg_path,
        gateway=GatewayConfig(mode=mode, fixture_dir=fixture_dir),
    )
    engine = Engine(config, transport=transport)
    snapshots = {}
    for q in questions:
        engine.ask(q["text"], question_id=q["id"])
        if q["number"] in snapshot_numbers:
            name = f"after_{q['number']}.json"
            target = os.path.join(snapshot_dir, name)
            shutil.copyfile(kg_path, target)
            snapshots[q["number"]] = target
    return engine, snapshots


def main():
    questions = question_list()
    batches = build_batches(questions)
    labels = {}
    for batch in batches:
        for s, p, o in batch:
            for term in (s, o):
                labels.setdefault(term, term)

    gt_items = {}
    transcripts = {system: {} for system in HALLU_PLAN}
    for q, batch in zip(questions, batches):
        items_n = min(7, len(batch))
        items = verbalize(batch, items_n)
        # Every plan omits a suffix of the item list, so each omit-able item
        # must stay below the addressed threshold even against the richest
        # possible answer (all other items plus every fabrication).
        from kgil.evaluation import ADDRESSED_THRESHOLD
        from kgil.textutil import stemmed_content_words

        max_missing = max(plan[q["number"] - 1] for plan in MISSING_PLAN.values())
        for i in range(len(items) - max_missing, len(items)):
            rest = [it for j, it in enumerate(items) if j != i] + FABRICATIONS
            rest_stems = set(stemmed_content_words("\n".join(rest)))
            stems = set(stemmed_content_words(items[i]))
            ratio = sum(1 for s in stems if s in rest_stems) / len(stems)
            assert ratio < ADDRESSED_THRESHOLD, (
                f"{q['id']} item {i} leaks ({ratio:.2f}): {items[i]!r}"
            )
        gt_items[q["id"]] = items
        index = q["number"] - 1
        for system in HALLU_PLAN:
            transcripts[system][q["id"]] = compose_answer(
                items,
                MISSING_PLAN[system][index],
                HALLU_PLAN[system][index],
                FABRICATION_OFFSET[system],
            )

    # Verify the evaluation plan against the real checkers before writing.
    for q in questions:
        index = q["number"] - 1
        gt = GroundTruthDoc.from_text(q["id"], "\n".join(gt_items[q["id"]]))
        for system in HALLU_PLAN:
            answer = transcripts[system][q["id"]]
            flagged = truth_check_deterministic(answer, gt)
            assert flagged.count_invalid == HALLU_PLAN[system][index], (
                f"{system}/{q['id']}: flagged {flagged.count_invalid}, "
                f"planned {HALLU_PLAN[system][index]}"
            )
            miss = completeness(answer, gt)
            assert miss.count_missing == MISSING_PLAN[system][index], (
                f"{system}/{q['id']}: missing {miss.count_missing}, "
                f"planned {MISSING_PLAN[system][index]} ({miss.missing_items})"
            )

    corpus_dir = os.path.join(FIXTURES_DIR, "corpus")
    kg_dir = os.path.join(FIXTURES_DIR, "kg")
    fixture_dir = os.path.join(corpus_dir, "llm_fixtures")
    shutil.rmtree(FIXTURES_DIR, ignore_errors=True)
    os.makedirs(fixture_dir, exist_ok=True)
    os.makedirs(kg_dir, exist_ok=True)
    write_corpus(corpus_dir, questions, gt_items, transcripts)

    # Scripted model outputs for the record pass, one entry per question.
    selection_queue = [q["url"] for q in questions]
    fusion_queue = []
    update_queue = []
    output_queue = []
    for q, batch in zip(questions, batches):
        answer = transcripts["rag-kg-il"][q["id"]]
        removed = "\nREMOVED:\nnone"
        if q["number"] == 6:
            removed = "\nREMOVED:\nGargling vinegar shortens the infection."
        fusion_queue.append(answer + removed)
        if q["number"] == 13:
            update_queue.append(payload_constructor_format(batch, labels))
        else:
            update_queue.append(payload_for(batch, labels))
        output_queue.append(reasoning_payload(q, batch))

    script = RecordScript(
        {
            "data_selection": selection_queue,
            "fusion_answer": fusion_queue,
            "graph_update": update_queue,
            "graph_output": output_queue,
        }
    )

    with tempfile.TemporaryDirectory() as tmp:
        run_pipeline(
            corpus_dir, fixture_dir, os.path.join(tmp, "kg-record.json"),
            questions, "record", transport=script,
        )
    normalize_fixture_latencies(fixture_dir)

    # Replay from clean state: snapshots + checkpoint verification.
    with tempfile.TemporaryDirectory() as tmp:
        engine, _snapshots = run_pipeline(
            corpus_dir, fixture_dir, os.path.join(tmp, "kg-replay.json"),
            questions, "replay",
            snapshot_numbers=(2, 20), snapshot_dir=kg_dir,
        )
        history = {h["index"]: h["stats"] for h in engine.history}
        for number, (terms, triples, rels) in CHECKPOINT_TARGETS.items():
            stats = history[number]
            assert (stats.term_count, stats.triple_count, stats.relation_type_count) == (
                terms, triples, rels
            ), f"checkpoint {number}: got {stats}"

        replay_bytes = open(os.path.join(tmp, "kg-replay.json"), "rb").read()

    # Determinism: a second clean replay writes identical bytes.
    with tempfile.TemporaryDirectory() as tmp:
        run_pipeline(
            corpus_dir, fixture_dir, os.path.join(tmp, "kg-replay2.json"),
            questions, "replay",
        )
        assert open(os.path.join(tmp, "kg-replay2.json"), "rb").read() == replay_bytes

    after_2 = kgstore.load(os.path.join(kg_dir, "after_2.json"))
    causal_2 = causal_subgraph(after_2, "pneumonia")
    edges_2 = {(e.source, e.label, e.target) for e in causal_2.edges}
    assert edges_2 == EXPECTED_CAUSAL_AFTER_2, f"after-2 causal edges: {edges_2}"

    after_20 = kgstore.load(os.path.join(kg_dir, "after_20.json"))
    causal_20 = causal_subgraph(after_20, "pneumonia")
    edges_20 = {(e.source, e.label, e.target) for e in causal_20.edges}
    assert edges_2 < edges_20, "after-20 causal set must strictly grow"
    mentioned = {t for e in edges_20 for t in (e[0], e[2])}
    for required in ("covid-19", "flu", "chest infection"):
        assert required in mentioned, f"{required} missing from causal view"

    specs = [
        SystemSpec(name, transcript_source(os.path.join(corpus_dir, "transcripts", name)))
        for name in ("rag-kg-il", "rag-only", "baseline-llm")
    ]
    report = run_eval(corpus_dir, specs)
    for agg in report.aggregates():
        assert agg.invalid_total == EXPECTED_TOTALS["hallucinations"][agg.system], agg
        if agg.system in EXPECTED_TOTALS["missing"]:
            assert agg.missing_total == EXPECTED_TOTALS["missing"][agg.system], agg
        if agg.system == "rag-kg-il":
            assert agg.missing_max == 1, agg

    fixture_count = len(os.listdir(fixture_dir))
    print(f"corpus written to {corpus_dir}")
    print(f"model fixtures: {fixture_count}")
    print(f"snapshots: {sorted(os.listdir(kg_dir))}")
    print("all generation-time checks passed")


if __name__ == "__main__":
    main()
