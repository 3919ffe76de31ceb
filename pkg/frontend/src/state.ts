// Session view state. The one hard rule: the studio never shows a scene
// and a program from different revisions, so updates arrive as one atomic
// snapshot bundle. All authoritative state lives on the server.

import type { GlbScene } from "./glb";
import type {
  BuildingProgramJson,
  ProgramJson,
  ScoreJson,
} from "./types";

export interface Snapshot {
  sessionId: string;
  revision: number;
  program: ProgramJson;
  buildings: Record<string, BuildingProgramJson>;
  scene: GlbScene;
  sceneBytes: ArrayBuffer;
  score: ScoreJson | null;
}

export interface HistoryEntry {
  revision: number;
  command: string;
  warnings: string[];
}

export type Listener = () => void;

export class SessionStore {
  private snapshot: Snapshot | null = null;
  private listeners: Listener[] = [];
  history: HistoryEntry[] = [];
  selectedElementId: string | null = null;
  /** Set when an edit hit a revision conflict; cleared on refresh. */
  staleRevision: number | null = null;
  lastError: string | null = null;

  get current(): Snapshot | null {
    return this.snapshot;
  }

  get revision(): number {
    return this.snapshot?.revision ?? -1;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  /** Atomically install a consistent (revision, program, scene, score) bundle. */
  commit(snapshot: Snapshot, entry?: HistoryEntry): void {
    if (this.snapshot && snapshot.sessionId === this.snapshot.sessionId
        && snapshot.revision < this.snapshot.revision) {
      throw new Error(
        `refusing to regress from revision ${this.snapshot.revision} ` +
        `to ${snapshot.revision}`,
      );
    }
    this.snapshot = snapshot;
    this.staleRevision = null;
    this.lastError = null;
    if (entry) this.history.push(entry);
    this.emit();
  }

  markStale(currentRevision: number): void {
    this.staleRevision = currentRevision;
    this.emit();
  }

  setError(message: string): void {
    this.lastError = message;
    this.emit();
  }

  select(elementId: string | null): void {
    this.selectedElementId = elementId;
    this.emit();
  }
}
