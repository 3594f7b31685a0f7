import { vi } from "vitest";
import { initDashboard } from "../src/app.js";
import { rememberSession } from "../src/storage.js";
import type { StoredSession } from "../src/storage.js";

export interface RecordedCall {
  method: string;
  url: string;
  body: unknown;
}

export interface RouteResult {
  status: number;
  body: unknown;
}

export type RouteHandler = (
  method: string,
  url: string,
  body: unknown,
) => RouteResult | null | Promise<RouteResult | null>;

// Fake transport: records every call, answers via the handler, and throws a
// TypeError (like a dead socket) when the handler returns null.
export class FakeService {
  calls: RecordedCall[] = [];

  constructor(private handler: RouteHandler) {}

  install(): void {
    vi.stubGlobal("fetch", async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      const method = init?.method ?? "GET";
      const body = typeof init?.body === "string" ? JSON.parse(init.body) : null;
      this.calls.push({ method, url, body });
      const result = await this.handler(method, url, body);
      if (result === null) throw new TypeError("fetch failed");
      return new Response(JSON.stringify(result.body), {
        status: result.status,
        headers: { "content-type": "application/json" },
      });
    });
  }

  count(method: string, suffix: string): number {
    return this.calls.filter((c) => c.method === method && c.url.endsWith(suffix)).length;
  }
}

export function mountDashboard(sessions: StoredSession[] = []): void {
  window.localStorage.clear();
  for (const session of [...sessions].reverse()) {
    rememberSession(window.localStorage, session);
  }
  document.body.innerHTML = '<div id="app"></div>';
  initDashboard(document);
}

export function storedSession(id: string): StoredSession {
  return { id, createdAt: "2026-08-16T10:00:00Z", dim: 2, tags: ["OBJECTIVE"] };
}

export function pick<T extends Element>(selector: string): T {
  const el = document.querySelector<T>(selector);
  if (el === null) throw new Error(`missing ${selector}`);
  return el;
}

export function setValue(selector: string, value: string): void {
  pick<HTMLInputElement>(selector).value = value;
}

export function submitForm(selector: string): void {
  pick<HTMLFormElement>(selector).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

export async function waitFor(check: () => boolean, timeout = 5000): Promise<void> {
  const deadline = Date.now() + timeout;
  while (!check()) {
    if (Date.now() > deadline) throw new Error("condition not met in time");
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}

export function askInputs(): HTMLInputElement[] {
  return [...document.querySelectorAll<HTMLInputElement>("#ask-body input[data-tag]")];
}

export function statusText(): string {
  return pick("#session-status").textContent ?? "";
}
