"""Classifying stakeholder requirements through the gateway.

Loads the sample project's requirement CSV, assembles the exact prompt
the pipeline would send, replays the canned mock response, and validates
the returned records against the inputs and the function catalog.
"""

import json
from pathlib import Path

from safereq import (
    LlmRequestParams,
    MockBackend,
    PromptEnvelope,
    PromptResource,
    assemble_prompt,
    catalog_from_mapping,
    chunk,
    load_requirements,
    parse_results_json,
    send,
    validate_records,
)
from safereq.classify import CLASSIFICATION_RESULT_SCHEMA

REPO = Path(__file__).resolve().parent.parent
PROJECT = REPO / "sample_project"


def main():
    requirements = load_requirements(
        PROJECT / "B_Requirements" / "input" / "safety_requirements.csv",
        "ReqID",
        ["Requirements"],
    )
    print("loaded", len(requirements), "requirements")

    resources = json.loads(
        (PROJECT / "B_Requirements" / "data_dictionary.json").read_text(encoding="utf-8")
    )
    catalog = catalog_from_mapping(resources["ARCHITECTURE"])
    instructions = (PROJECT / "B_Requirements" / "instructions.txt").read_text(
        encoding="utf-8"
    )

    backend = MockBackend(PROJECT / "fixtures")
    params = LlmRequestParams(model_id="gpt-4")

    records = []
    for piece in chunk(requirements, 10):
        envelope = PromptEnvelope(
            instructions=instructions,
            resources=tuple(
                PromptResource(tag=key, body=body) for key, body in resources.items()
            ),
            dataset_name="Drone Safety Requirements",
            rows=tuple((req.req_id, req.text) for req in piece.rows),
        )
        prompt = assemble_prompt(envelope)
        print("\nprompt head:")
        for line in prompt.splitlines()[:3]:
            print(" ", line)

        result = send(prompt, params, backend)
        print("response status:", result.status)
        records.extend(parse_results_json(result.raw_text, CLASSIFICATION_RESULT_SCHEMA).records)

    outcome = validate_records(records, requirements, catalog)
    print("\nclassified rows:")
    print(f"  {'ReqID':6} {'Function':9} {'Type':5} {'Conf':4} flags")
    for row in outcome.rows:
        print(
            f"  {row.req_id:6} {row.function:9} {row.rtype:5} "
            f"{row.confidence:4} {'|'.join(row.flags)}"
        )
    print("quarantined:", len(outcome.quarantined))


if __name__ == "__main__":
    main()
