/**
 * Snapshot-based undo/redo with an immutable initial state at the bottom,
 * so the stack never empties (depth >= 1).
 */
export class UndoStack<T> {
  private past: T[];
  private future: T[] = [];

  constructor(initial: T) {
    this.past = [initial];
  }

  get depth(): number {
    return this.past.length;
  }

  get current(): T {
    return this.past[this.past.length - 1];
  }

  get canUndo(): boolean {
    return this.past.length > 1;
  }

  get canRedo(): boolean {
    return this.future.length > 0;
  }

  /** Record a new state; clears the redo branch. */
  push(state: T): void {
    this.past.push(state);
    this.future = [];
  }

  /** Step back; at the initial state this is a no-op. */
  undo(): T {
    if (this.canUndo) {
      this.future.push(this.past.pop() as T);
    }
    return this.current;
  }

  redo(): T {
    const state = this.future.pop();
    if (state !== undefined) {
      this.past.push(state);
    }
    return this.current;
  }

  /** Replace everything with a fresh initial state. */
  reset(initial: T): void {
    this.past = [initial];
    this.future = [];
  }
}
