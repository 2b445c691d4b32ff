/** Checkpoint file IO: plain JSON, small models only. */

import * as fs from "node:fs";

import { Checkpoint, Model, fromCheckpoint, toCheckpoint } from "./model.js";

export function saveCheckpoint(model: Model, path: string): void {
  fs.writeFileSync(path, JSON.stringify(toCheckpoint(model)), "utf-8");
}

export function loadCheckpoint(path: string): Model {
  const ckpt = JSON.parse(fs.readFileSync(path, "utf-8")) as Checkpoint;
  return fromCheckpoint(ckpt);
}
