import { readFileSync } from "node:fs";
import { join } from "node:path";
import type {
  DocumentInfo,
  ErrorBody,
  FetchLike,
  SearchEnvelope,
} from "../src/api.js";

export function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(process.cwd(), "test", "fixtures", name), "utf8"));
}

export const searchFixture = (name: string) => fixture(name) as SearchEnvelope;
export const documentFixture = (name: string) => fixture(name) as DocumentInfo;
export const errorFixture = (name: string) => fixture(name) as ErrorBody;

/** The subset of Response the client actually touches. */
export function jsonResponse(status: number, body: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  } as unknown as Response;
}

export interface Route {
  status: number;
  body: unknown;
}

/** Fetch stand-in that replays recorded responses and logs every URL. */
export function fakeFetch(routes: Record<string, Route>): {
  fetch: FetchLike;
  calls: string[];
} {
  const calls: string[] = [];
  const fetch: FetchLike = async (url: string) => {
    calls.push(url);
    const route = routes[url];
    if (!route) throw new Error(`no recorded response for ${url}`);
    return jsonResponse(route.status, route.body);
  };
  return { fetch, calls };
}

/** Fetch stand-in whose responses resolve only when the test says so. */
export function deferredFetch(): {
  fetch: FetchLike;
  calls: string[];
  settle: (url: string, status: number, body: unknown) => void;
} {
  const waiting = new Map<string, (response: Response) => void>();
  const calls: string[] = [];
  const fetch: FetchLike = (url: string) => {
    calls.push(url);
    return new Promise<Response>((resolve) => waiting.set(url, resolve));
  };
  return {
    fetch,
    calls,
    settle: (url, status, body) => {
      const resolve = waiting.get(url);
      if (!resolve) throw new Error(`nothing waiting on ${url}`);
      resolve(jsonResponse(status, body));
    },
  };
}
