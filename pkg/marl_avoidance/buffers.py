"""
Replay buffer, sequence buffer and exploration noise.

The replay buffer stores either single transitions or, for the LSTM-actor
variant, whole sequence-buffer snapshots. Sampling is uniform without
replacement inside one batch.
"""

from collections import deque
from dataclasses import dataclass
from typing import Any, Deque, Generic, List, Optional, Sequence, TypeVar, Union

import numpy as np

from marl_avoidance.errors import ConfigurationError, ReplayNotReadyError
from marl_avoidance.models.transitions import SequenceWindow, Transition

Element = TypeVar("Element")


class ReplayBuffer(Generic[Element]):
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigurationError(f"capacity must be positive, got {capacity}", key="buffer-capacity")
        self.capacity = capacity
        self._storage: List[Any] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._storage)

    def push(self, element: Element) -> "ReplayBuffer[Element]":
        """Append, overwriting the oldest element once full."""
        if len(self._storage) < self.capacity:
            self._storage.append(element)
        else:
            self._storage[self._cursor] = element
        self._cursor = (self._cursor + 1) % self.capacity
        return self

    def is_ready(self, batch_size: int) -> bool:
        return len(self._storage) >= batch_size

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[Element]:
        if not self.is_ready(batch_size):
            raise ReplayNotReadyError(f"buffer holds {len(self)} elements, batch needs {batch_size}")
        indices = rng.choice(len(self._storage), size=batch_size, replace=False)
        return [self._storage[i] for i in indices]

    def items(self) -> List[Element]:
        """Contents, oldest first."""
        if len(self._storage) < self.capacity:
            return list(self._storage)
        return self._storage[self._cursor :] + self._storage[: self._cursor]


class SequenceBuffer:
    """FIFO of the most recent transitions of the current episode."""

    def __init__(self, seq_length: int):
        if seq_length < 1:
            raise ConfigurationError(f"seq-length must be at least 1, got {seq_length}", key="seq-length")
        self.seq_length = seq_length
        self._queue: Deque[Transition] = deque(maxlen=seq_length)

    def __len__(self) -> int:
        return len(self._queue)

    def push(self, transition: Transition) -> "SequenceBuffer":
        self._queue.append(transition)
        return self

    def reset(self) -> "SequenceBuffer":
        self._queue.clear()
        return self

    def transitions(self) -> List[Transition]:
        return list(self._queue)

    def snapshot(self) -> SequenceWindow:
        return SequenceWindow(transitions=list(self._queue), seq_length=self.seq_length)


def _left_pad(rows: List[np.ndarray], seq_length: int) -> np.ndarray:
    rows = rows[-seq_length:]
    padding = [rows[0]] * (seq_length - len(rows))
    return np.stack(padding + rows)


def observation_window(
    seq: Union[Sequence[Transition], SequenceWindow], agent: int, seq_length: int, field: str = "obs"
) -> np.ndarray:
    """
    Agent observations oldest to newest, shape (seq_length, d).

    Short windows are left-padded by repeating the oldest stored observation.
    With field="next_obs" the window is shifted one step forward: it ends at the
    final transition's next observation, exactly what acting one step later sees.
    """
    transitions = seq.transitions if isinstance(seq, SequenceWindow) else list(seq)
    if not transitions:
        raise ConfigurationError("cannot build an observation window from no transitions", key="window")
    rows = [t.obs[agent] for t in transitions]
    if field == "next_obs":
        rows.append(transitions[-1].next_obs[agent])
    elif field != "obs":
        raise ConfigurationError(f"unknown observation field '{field}'", key="field")
    return _left_pad(rows, seq_length)


def acting_window(
    previous: Sequence[Transition], agent: int, current_obs: np.ndarray, seq_length: int
) -> np.ndarray:
    """Window ending at the current observation, as the actor will see it at train time."""
    rows = [t.obs[agent] for t in list(previous)[-(seq_length - 1) :]] if seq_length > 1 else []
    rows.append(np.asarray(current_obs, dtype=np.float64))
    return _left_pad(rows, seq_length)


def explore(action, rng: np.random.Generator, epsilon: float, noise_rate: float) -> np.ndarray:
    """Epsilon-uniform replacement, otherwise additive Gaussian noise; always clipped to [-1, 1]."""
    action = np.asarray(action, dtype=np.float64)
    if epsilon > 0 and rng.random() < epsilon:
        return rng.uniform(-1.0, 1.0, size=action.shape)
    if noise_rate > 0:
        action = action + rng.normal(0.0, noise_rate, size=action.shape)
    return np.clip(action, -1.0, 1.0)


@dataclass
class Batch:
    state: np.ndarray
    next_state: np.ndarray
    obs: List[np.ndarray]
    next_obs: List[np.ndarray]
    actions: List[np.ndarray]
    rewards: np.ndarray
    terminal: np.ndarray
    actor_inputs: Optional[List[np.ndarray]] = None
    next_actor_inputs: Optional[List[np.ndarray]] = None

    @property
    def size(self) -> int:
        return int(self.state.shape[0])

    @property
    def n_agents(self) -> int:
        return len(self.obs)

    def actor_input(self, agent: int) -> np.ndarray:
        return self.obs[agent] if self.actor_inputs is None else self.actor_inputs[agent]

    def next_actor_input(self, agent: int) -> np.ndarray:
        return self.next_obs[agent] if self.next_actor_inputs is None else self.next_actor_inputs[agent]


def collate_transitions(transitions: Sequence[Transition]) -> Batch:
    n = transitions[0].n_agents
    return Batch(
        state=np.stack([t.state for t in transitions]),
        next_state=np.stack([t.next_state for t in transitions]),
        obs=[np.stack([t.obs[a] for t in transitions]) for a in range(n)],
        next_obs=[np.stack([t.next_obs[a] for t in transitions]) for a in range(n)],
        actions=[np.stack([t.actions[a] for t in transitions]) for a in range(n)],
        rewards=np.stack([t.rewards for t in transitions]),
        terminal=np.array([float(t.terminal) for t in transitions]),
    )


def collate_windows(windows: Sequence[SequenceWindow], seq_length: int) -> Batch:
    """Critic fields come from each window's final transition; actor inputs are the padded windows."""
    batch = collate_transitions([w.last for w in windows])
    n = batch.n_agents
    batch.actor_inputs = [
        np.stack([observation_window(w, a, seq_length, "obs") for w in windows]) for a in range(n)
    ]
    batch.next_actor_inputs = [
        np.stack([observation_window(w, a, seq_length, "next_obs") for w in windows]) for a in range(n)
    ]
    return batch
