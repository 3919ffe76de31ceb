// Orchestrates API calls into atomic store commits: an edit only becomes
// visible once the matching scene and score for the new revision arrived.

import { SessionClient, StaleRevisionError } from "./api";
import { parseGlb } from "./glb";
import type { SessionStore, Snapshot } from "./state";
import type { SessionPayload } from "./types";

async function buildSnapshot(
  client: SessionClient,
  payload: SessionPayload,
): Promise<Snapshot> {
  const sceneBytes = await client.getSceneBytes(
    payload.session_id,
    payload.revision,
  );
  const score = await client
    .getScore(payload.session_id)
    .catch(() => null);
  return {
    sessionId: payload.session_id,
    revision: payload.revision,
    program: payload.program,
    buildings: payload.buildings ?? {},
    scene: parseGlb(sceneBytes),
    sceneBytes,
    score,
  };
}

export async function loadSession(
  client: SessionClient,
  store: SessionStore,
  sessionId: string,
): Promise<void> {
  const payload = await client.getProgram(sessionId);
  store.commit(await buildSnapshot(client, payload));
}

export async function createSession(
  client: SessionClient,
  store: SessionStore,
  blockProgram: unknown,
  buildings?: Record<string, unknown>,
  prompt?: string,
): Promise<string> {
  const payload = await client.createSession({
    block_program: blockProgram,
    buildings,
    prompt,
  });
  store.commit(await buildSnapshot(client, payload));
  return payload.session_id;
}

/**
 * Submit one edit command against the revision currently on screen.
 * Returns true when committed; on a conflict the store is flagged stale so
 * the UI can offer refresh-and-retry.
 */
export async function submitEdit(
  client: SessionClient,
  store: SessionStore,
  command: string,
): Promise<boolean> {
  const base = store.current;
  if (!base) throw new Error("no session loaded");
  try {
    const payload = await client.submitEdit(base.sessionId, base.revision, command);
    store.commit(await buildSnapshot(client, payload), {
      revision: payload.revision,
      command,
      warnings: payload.warnings ?? [],
    });
    return true;
  } catch (error) {
    if (error instanceof StaleRevisionError) {
      store.markStale(error.currentRevision);
      return false;
    }
    store.setError(error instanceof Error ? error.message : String(error));
    return false;
  }
}

/** Refresh to the server's current revision (the 409 recovery path). */
export async function refreshSession(
  client: SessionClient,
  store: SessionStore,
): Promise<void> {
  const base = store.current;
  if (!base) return;
  await loadSession(client, store, base.sessionId);
}
