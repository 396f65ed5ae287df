#!/usr/bin/env python3
"""Generate the shipped toy fixtures: knowledge graph + document corpus.

Deterministic, no randomness. Entity names are synthetic so the fixtures
assert no real medical facts.
"""
import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "fixtures")

CHAINS = [
    {
        "root": "Veltrane deficiency syndrome",
        "symptom": "paroxysmal flushing",
        "assoc": "Korrin-Madsen disorder",
        "complication": "refractory cytopenia",
        "drug": "veltranib",
        "gene": "VLT4 receptor",
        "anatomy": "splenic cords",
    },
    {
        "root": "Arpagio crystal myopathy",
        "symptom": "gait instability",
        "assoc": "Delmare fasciitis",
        "complication": "progressive contracture",
        "drug": "arpagiline",
        "gene": "ACM9 channel",
        "anatomy": "perimysial sheath",
    },
    {
        "root": "Nocturnal kelporrhea",
        "symptom": "episodic bradypnea",
        "assoc": "Sorvex syndrome",
        "complication": "alveolar scarring",
        "drug": "kelposant",
        "gene": "KLP2 transporter",
        "anatomy": "bronchiolar lining",
    },
    {
        "root": "Tessellar keratopathy",
        "symptom": "mosaic corneal haze",
        "assoc": "Brindel dystrophy",
        "complication": "stromal thinning",
        "drug": "tessamide",
        "gene": "TSK1 collagen",
        "anatomy": "corneal stroma",
    },
    {
        "root": "Quillon fever",
        "symptom": "cyclic rigors",
        "assoc": "Mardale arthritis",
        "complication": "synovial erosion",
        "drug": "quillocine",
        "gene": "QLF6 kinase",
        "anatomy": "synovial membrane",
    },
    {
        "root": "Pellagrine anemia",
        "symptom": "angular glossopathy",
        "assoc": "Vossmer colitis",
        "complication": "mucosal ulceration",
        "drug": "pellagrinol",
        "gene": "PGA3 ligase",
        "anatomy": "ileal mucosa",
    },
]

ROLE_TYPES = {
    "root": "disease",
    "symptom": "symptom",
    "assoc": "disease",
    "complication": "disease",
    "drug": "drug",
    "gene": "gene_target",
    "anatomy": "anatomy",
}

HUBS = [
    ("systemic inflammation", "symptom"),
    ("anticoagulant therapy", "treatment"),
    ("low sodium diet", "treatment"),
]

CHAIN_EDGES = [
    ("root", "symptom_findings", "symptom"),
    ("symptom", "associated_findings", "assoc"),
    ("assoc", "complications", "complication"),
    ("complication", "treated_by", "drug"),
    ("drug", "targets", "gene"),
    ("gene", "affects", "anatomy"),
]


def graph_lines():
    lines = []
    for chain in CHAINS:
        for role, name in chain.items():
            lines.append({"record": "entity", "name": name, "type": ROLE_TYPES[role]})
    for name, etype in HUBS:
        lines.append({"record": "entity", "name": name, "type": etype})
    for chain in CHAINS:
        for head_role, label, tail_role in CHAIN_EDGES:
            lines.append(
                {
                    "record": "relation",
                    "head": chain[head_role],
                    "label": label,
                    "tail": chain[tail_role],
                }
            )
        lines.append(
            {
                "record": "relation",
                "head": chain["symptom"],
                "label": "comorbid_with",
                "tail": "systemic inflammation",
            }
        )
        lines.append(
            {
                "record": "relation",
                "head": chain["drug"],
                "label": "contraindicated_with",
                "tail": "anticoagulant therapy",
            }
        )
        lines.append(
            {
                "record": "relation",
                "head": chain["drug"],
                "label": "dietary_recommendations",
                "tail": "low sodium diet",
            }
        )
    return lines


BODY_TEMPLATES = {
    "root": "{name} is a rare inherited condition first characterized in 2011. Affected families present with {symptom} during early adulthood. Registry estimates describe roughly 54 confirmed pedigrees worldwide, most tracked by regional referral centers.",
    "symptom": "{name} is an intermittent clinical finding documented in cohort reviews from 2016. It frequently co-occurs with systemic inflammation and precedes {assoc} in longitudinal follow-up of susceptible patients.",
    "assoc": "{name} is a progressive disorder that complicates untreated disease. Case series from 2018 report evolution toward {complication} in a substantial fraction of patients under observation.",
    "complication": "{name} marks the late phase of the disease course. Interventional studies from 2020 evaluated targeted therapy with {drug}, with 37 participants completing the full protocol.",
    "drug": "{name} is an investigational agent dosed orally. Pharmacology work in 2021 established selective binding of the {gene}, with contraindications around anticoagulant therapy and a recommendation toward a low sodium diet.",
    "gene": "The {name} is a macromolecular target expressed in restricted tissue. Structural mapping published in 2022 localized its activity to the {anatomy}, informing downstream dosing models.",
    "anatomy": "The {name} is the anatomical compartment where late-stage findings concentrate. Imaging atlases from 2019 describe characteristic remodeling in affected individuals across 12 reference centers.",
}

GENERAL_DOCS = [
    ("regional referral network", "Coverage of rural referral networks expanded in 2017, connecting community clinics with tertiary centers for rare-condition triage and second opinions."),
    ("registry methodology overview", "Patient registries rely on standardized intake forms. A 2015 methods review compared 23 registry designs and their follow-up retention figures."),
    ("laboratory accreditation news", "National accreditation rounds in 2023 audited assay reproducibility across reference laboratories, with most sites passing on first inspection."),
    ("telemedicine adoption report", "Telemedicine visits grew steadily after 2020, changing how follow-up appointments are scheduled for patients in remote districts."),
    ("clinical trial registration primer", "Prospective registration of interventional studies became standard practice; a 2014 primer walks through registry selection and timing."),
    ("hospital funding announcement", "A metropolitan hospital group announced a 2024 infrastructure grant supporting imaging upgrades and two new outpatient wings."),
    ("medical editing style guide", "Style guidance for case reports emphasizes structured abstracts, consistent terminology, and explicit consent statements."),
    ("conference proceedings digest", "The 2022 proceedings digest summarizes poster sessions on diagnostics, therapeutics, and health-systems research."),
]


def corpus_lines():
    docs = []
    idx = 0
    dates = ["2019-03-14", "2020-07-02", "2021-11-23", "2022-05-09", "2023-01-30", "2024-04-17"]
    authorities = [0.92, 0.85, 0.78, 0.88, 0.81, 0.9, 0.75]
    for c_i, chain in enumerate(CHAINS):
        for r_i, (role, name) in enumerate(chain.items()):
            body = BODY_TEMPLATES[role].format(name=name, **{k: v for k, v in chain.items()})
            docs.append(
                {
                    "id": f"doc{idx:03d}",
                    "title": name,
                    "body": body,
                    "source_tag": "medical",
                    "authority_score": authorities[(c_i + r_i) % len(authorities)],
                    "timestamp": dates[(c_i * 7 + r_i) % len(dates)],
                }
            )
            idx += 1
    for g_i, (title, body) in enumerate(GENERAL_DOCS):
        docs.append(
            {
                "id": f"doc{idx:03d}",
                "title": title,
                "body": body,
                "source_tag": "general",
                "authority_score": 0.4 + 0.05 * (g_i % 5),
                "timestamp": dates[g_i % len(dates)],
            }
        )
        idx += 1
    return docs


def main():
    os.makedirs(OUT, exist_ok=True)
    with open(os.path.join(OUT, "graph.jsonl"), "w") as fh:
        for line in graph_lines():
            fh.write(json.dumps(line) + "\n")
    corpus = corpus_lines()
    assert len(corpus) == 50, len(corpus)
    with open(os.path.join(OUT, "corpus.jsonl"), "w") as fh:
        for line in corpus:
            fh.write(json.dumps(line) + "\n")
    print(f"graph: {len(graph_lines())} lines, corpus: {len(corpus)} docs")


if __name__ == "__main__":
    main()
