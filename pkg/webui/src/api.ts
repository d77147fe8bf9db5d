/**
 * Typed client for the search service's JSON endpoints.
 *
 * Shapes mirror the server's document schema exactly; all query
 * semantics stay server-side, the client only fetches and renders.
 */

export interface ColumnInfo {
  name: string;
  description: string;
  type: string;
}

export interface LinkInfo {
  kind: "fk_cell" | "drill_line";
  row: number;
  column: string | null;
  target: string;
  label: string;
  fk_no: number | null;
  params: [string, string | number][];
  href: string;
}

export type Cell = string | number | null;

export interface FrameInfo {
  relation: string;
  description: string;
  columns: ColumnInfo[];
  rows: Cell[][];
  rank_counts: number[] | null;
  total: number;
  links: LinkInfo[];
}

export interface DocumentInfo {
  query: string;
  interpretation: string;
  frames: FrameInfo[];
  diagnostics: string[];
}

export interface SearchEnvelope {
  query: string;
  rank: string;
  interp: string;
  groups: DocumentInfo[];
}

export interface ErrorBody {
  code: string;
  message: string;
  detail: Record<string, unknown>;
}

export interface SearchOptions {
  rank?: string;
  interp?: string;
}

/** A failed request, carrying the server's error body when one came back. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number | null;

  constructor(message: string, code = "network_error", status: number | null = null) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

export type FetchLike = (url: string) => Promise<Response>;

async function requestJson(fetchImpl: FetchLike, url: string): Promise<unknown> {
  let response: Response;
  try {
    response = await fetchImpl(url);
  } catch (err) {
    throw new ApiError(`cannot reach the search service: ${String(err)}`);
  }
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    body = null;
  }
  if (!response.ok) {
    const error = body as Partial<ErrorBody> | null;
    throw new ApiError(
      error && typeof error.message === "string"
        ? error.message
        : `request failed with status ${response.status}`,
      error && typeof error.code === "string" ? error.code : "http_error",
      response.status,
    );
  }
  if (body === null) {
    throw new ApiError("the service returned an unreadable body", "bad_body", response.status);
  }
  return body;
}

export function searchUrl(q: string, options: SearchOptions = {}): string {
  const params = new URLSearchParams({ q });
  if (options.rank) params.set("rank", options.rank);
  if (options.interp) params.set("interp", options.interp);
  return `/api/search?${params.toString()}`;
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(fetchImpl?: FetchLike) {
    this.fetchImpl =
      fetchImpl ?? ((url: string) => fetch(url, { headers: { accept: "application/json" } }));
  }

  async search(q: string, options: SearchOptions = {}): Promise<SearchEnvelope> {
    return (await requestJson(this.fetchImpl, searchUrl(q, options))) as SearchEnvelope;
  }

  /** Fetch one document by the href a link annotation carries. */
  async document(href: string): Promise<DocumentInfo> {
    return (await requestJson(this.fetchImpl, href)) as DocumentInfo;
  }
}
