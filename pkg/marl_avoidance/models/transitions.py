from typing import List

from pydantic import Field, model_validator

from marl_avoidance.models.base import ArrayModel, FiniteArray


class Transition(ArrayModel):
    """One stored interaction: (s, s', tau, tau', u_1..u_n, r_1..r_n, terminal)."""

    state: FiniteArray
    next_state: FiniteArray
    obs: List[FiniteArray]
    next_obs: List[FiniteArray]
    actions: List[FiniteArray]
    rewards: FiniteArray
    terminal: bool = False
    step_index: int = Field(default=0, ge=0)
    episode_index: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_agent_lists(self):
        n = self.rewards.shape[0] if self.rewards.ndim == 1 else -1
        if n < 1:
            raise ValueError(f"rewards must be a non-empty vector, got shape {self.rewards.shape}")
        for name in ("obs", "next_obs", "actions"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} holds {len(getattr(self, name))} entries for {n} agents")
        if self.state.shape != self.next_state.shape:
            raise ValueError("state and next_state must have identical shapes")
        return self

    @property
    def n_agents(self) -> int:
        return int(self.rewards.shape[0])


class SequenceWindow(ArrayModel):
    """A time-contiguous run of transitions from one episode, oldest first."""

    transitions: List[Transition]
    seq_length: int = Field(ge=1)

    @model_validator(mode="after")
    def check_contiguous(self):
        if not 1 <= len(self.transitions) <= self.seq_length:
            raise ValueError(f"window holds {len(self.transitions)} transitions, limit {self.seq_length}")
        first = self.transitions[0]
        for offset, transition in enumerate(self.transitions):
            if transition.episode_index != first.episode_index:
                raise ValueError("window spans more than one episode")
            if transition.step_index != first.step_index + offset:
                raise ValueError("window transitions are not time-contiguous")
        return self

    @property
    def last(self) -> Transition:
        return self.transitions[-1]

    def __len__(self) -> int:
        return len(self.transitions)
