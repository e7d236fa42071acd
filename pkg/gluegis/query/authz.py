from typing import Iterable, Text

from gluegis.model.entities import AccessRule, Capability


def authorize(acl: Iterable[AccessRule], vo: Text,
              capability: Capability) -> bool:
    """VO-grained check: true iff ``acl`` grants ``capability`` to ``vo``.

    ``manage`` implies every other capability. An empty ACL denies all.
    """
    capability = Capability(capability)
    for rule in acl:
        if rule.vo != vo:
            continue
        if rule.capability is capability \
                or rule.capability is Capability.MANAGE:
            return True
    return False
