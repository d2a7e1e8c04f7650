// Received-state buffer backing the post-race scrubber.

import { StateMessage } from "./protocol.js";

export class ReplayBuffer {
  private states: StateMessage[] = [];

  constructor(private capacity = 4000) {}

  push(state: StateMessage): void {
    if (state.phase !== "running" && state.phase !== "finished") return;
    this.states.push(state);
    if (this.states.length > this.capacity) this.states.shift();
  }

  get length(): number {
    return this.states.length;
  }

  at(index: number): StateMessage | null {
    if (this.states.length === 0) return null;
    const clamped = Math.min(Math.max(Math.trunc(index), 0), this.states.length - 1);
    return this.states[clamped];
  }

  clear(): void {
    this.states = [];
  }
}
