import json
from pathlib import Path

import pytest

from finrag.corpus import KnowledgeDocument


@pytest.fixture
def write_jsonl(tmp_path):
    def _write(name: str, rows: list[dict]) -> Path:
        path = tmp_path / name
        path.write_text(
            "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows),
            encoding="utf-8",
        )
        return path

    return _write


def make_doc(
    doc_id="d1",
    kind="report",
    body="quarterly revenue grew strongly",
    company_ids=("acme",),
    published_at="2021-03-15",
    label=None,
):
    return KnowledgeDocument(
        id=doc_id,
        kind=kind,
        body=body,
        company_ids=tuple(company_ids),
        published_at=published_at,
        label=label,
    )
