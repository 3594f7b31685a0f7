// Session list lives in browser storage so the dashboard survives reloads.

export interface StoredSession {
  id: string;
  createdAt: string;
  dim: number;
  tags: string[];
}

const SESSIONS_KEY = "askopt.sessions";
const BASE_KEY = "askopt.base";
const MAX_SESSIONS = 50;

export function loadSessions(storage: Storage): StoredSession[] {
  const raw = storage.getItem(SESSIONS_KEY);
  if (raw === null) return [];
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    return [];
  }
  if (!Array.isArray(parsed)) return [];
  return parsed.filter(
    (entry): entry is StoredSession =>
      typeof entry === "object" &&
      entry !== null &&
      typeof (entry as StoredSession).id === "string",
  );
}

export function rememberSession(storage: Storage, entry: StoredSession): StoredSession[] {
  const rest = loadSessions(storage).filter((s) => s.id !== entry.id);
  const sessions = [entry, ...rest].slice(0, MAX_SESSIONS);
  storage.setItem(SESSIONS_KEY, JSON.stringify(sessions));
  return sessions;
}

export function forgetSession(storage: Storage, id: string): StoredSession[] {
  const sessions = loadSessions(storage).filter((s) => s.id !== id);
  storage.setItem(SESSIONS_KEY, JSON.stringify(sessions));
  return sessions;
}

export function loadBaseUrl(storage: Storage, fallback: string): string {
  return storage.getItem(BASE_KEY) ?? fallback;
}

export function saveBaseUrl(storage: Storage, base: string): void {
  storage.setItem(BASE_KEY, base);
}
