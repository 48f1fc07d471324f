import { describe, expect, it } from "vitest";

import { UndoStack } from "../src/undoStack.js";

describe("UndoStack", () => {
  it("keeps the initial state at depth >= 1", () => {
    const stack = new UndoStack("initial");
    expect(stack.depth).toBe(1);
    expect(stack.undo()).toBe("initial");
    expect(stack.depth).toBe(1);
    expect(stack.canUndo).toBe(false);
  });

  it("is a pure stack discipline", () => {
    const stack = new UndoStack(0);
    for (let i = 1; i <= 5; i++) stack.push(i);
    expect(stack.current).toBe(5);
    for (let i = 4; i >= 0; i--) expect(stack.undo()).toBe(i);
    expect(stack.current).toBe(0);
  });

  it("redo replays undone states until a new push", () => {
    const stack = new UndoStack("a");
    stack.push("b");
    stack.push("c");
    stack.undo();
    expect(stack.canRedo).toBe(true);
    expect(stack.redo()).toBe("c");
    stack.undo();
    stack.push("d");
    expect(stack.canRedo).toBe(false);
    expect(stack.redo()).toBe("d");
  });

  it("reset replaces history", () => {
    const stack = new UndoStack(1);
    stack.push(2);
    stack.reset(9);
    expect(stack.depth).toBe(1);
    expect(stack.current).toBe(9);
    expect(stack.canUndo).toBe(false);
  });
});
