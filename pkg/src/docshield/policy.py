"""Enforcement actions for classified documents.

The classifier says what a document is; this module says what to do
about it. The default posture: Restricted content is blocked outright,
Internal content may circulate inside the organization only,
Unrestricted content flows freely, and any label the policy does not
recognize raises an Alert so a human looks at it instead of the
document silently passing.

Verdicts are advisory records. Nothing here intercepts traffic; the
caller (or the surrounding infrastructure) enforces.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .bundle import ModelBundle, classify_text
from .errors import DocShieldError, InputError

__all__ = [
    "Action",
    "PolicyConfig",
    "DEFAULT_POLICY",
    "ScanDiagnostics",
    "ScanVerdict",
    "parse_action",
    "decide",
    "scan_document",
]


class Action(enum.Enum):
    BLOCK = "Block"
    ALLOW_INTERNAL = "AllowInternal"
    ALLOW = "Allow"
    ALERT = "Alert"


_ACTION_BY_LOWER = {a.value.lower(): a for a in Action}


def parse_action(name: str) -> Action:
    """Case-insensitive action lookup for policy files."""
    action = _ACTION_BY_LOWER.get(name.strip().lower())
    if action is None:
        valid = ", ".join(a.value for a in Action)
        raise InputError(f"unknown action {name!r}; valid actions: {valid}")
    return action


@dataclass(frozen=True)
class PolicyConfig:
    mapping: Mapping[str, Action] = field(default_factory=dict)
    default_action: Action = Action.ALERT


DEFAULT_POLICY = PolicyConfig(
    mapping={
        "Restricted": Action.BLOCK,
        "Internal": Action.ALLOW_INTERNAL,
        "Unrestricted": Action.ALLOW,
    },
    default_action=Action.ALERT,
)


def decide(label: str, policy: PolicyConfig) -> Action:
    """Total: every label maps to exactly one action, via the explicit
    mapping or the fallback."""
    return policy.mapping.get(label, policy.default_action)


@dataclass(frozen=True)
class ScanDiagnostics:
    unknown_tokens: int
    zero_vector: bool


@dataclass(frozen=True)
class ScanVerdict:
    doc_id: str
    label: str
    probabilities: tuple
    action: Action
    diagnostics: ScanDiagnostics

    def to_json_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "label": self.label,
            "probabilities": list(self.probabilities),
            "action": self.action.value,
            "diagnostics": {
                "unknown_tokens": self.diagnostics.unknown_tokens,
                "zero_vector": self.diagnostics.zero_vector,
            },
        }


def _check_policy_labels(policy: PolicyConfig, labels: tuple) -> None:
    unknown = sorted(k for k in policy.mapping if k not in labels)
    if unknown:
        raise InputError(
            f"policy maps labels {unknown} that the model does not "
            f"predict (model labels: {sorted(labels)})"
        )


def scan_document(
    bundle: ModelBundle,
    text: str,
    policy: Optional[PolicyConfig] = None,
    doc_id: str = "<text>",
) -> ScanVerdict:
    """Classify one document and decide its action.

    The policy must not map labels the model cannot emit; such a policy
    is a configuration error, caught here rather than lying dormant."""
    policy = DEFAULT_POLICY if policy is None else policy
    _check_policy_labels(policy, bundle.labels)
    try:
        pred = classify_text(bundle, text, doc_id=doc_id)
    except DocShieldError as exc:
        raise type(exc)(f"while scanning {doc_id}: {exc}") from exc
    return ScanVerdict(
        doc_id=pred.doc_id,
        label=pred.label,
        probabilities=pred.probabilities,
        action=decide(pred.label, policy),
        diagnostics=ScanDiagnostics(
            unknown_tokens=pred.unknown_tokens,
            zero_vector=pred.zero_vector,
        ),
    )
