"""Host facts files: one JSON object per line, field names as in HostFact."""
import logging
from typing import Iterable, List, Text

from pydantic import ValidationError

from gluegis.exceptions import FactsFormatError
from gluegis.model.entities import HostFact
from gluegis.model.validation import validate_entity
from gluegis.utils import describe_validation_error


def parse_host_facts(lines: Iterable[Text]) -> List[HostFact]:
    facts = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            fact = HostFact.model_validate_json(line)
        except ValidationError as e:
            raise FactsFormatError(number, describe_validation_error(e))
        report = validate_entity(fact)
        if not report.ok:
            raise FactsFormatError(
                number, '; '.join(str(v) for v in report))
        facts.append(fact)
    return facts


def load_host_facts(path: Text) -> List[HostFact]:
    with open(path, 'r', encoding='utf-8') as f:
        facts = parse_host_facts(f)
    logging.debug(f'Loaded {len(facts)} host facts from {path}')
    return facts
