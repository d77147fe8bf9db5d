import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, searchUrl } from "../src/api.js";
import {
  documentFixture,
  errorFixture,
  fakeFetch,
  jsonResponse,
  searchFixture,
} from "./helpers.js";

describe("searchUrl", () => {
  it("builds the bare query form", () => {
    expect(searchUrl("member")).toBe("/api/search?q=member");
  });

  it("carries rank and interp when given", () => {
    expect(searchUrl("John", { rank: "fk_count", interp: "all" })).toBe(
      "/api/search?q=John&rank=fk_count&interp=all",
    );
  });

  it("escapes reserved characters in the query text", () => {
    expect(searchUrl("a&b=c")).toBe("/api/search?q=a%26b%3Dc");
    expect(searchUrl("two words")).toBe("/api/search?q=two+words");
  });
});

describe("ApiClient.search", () => {
  it("fetches the search endpoint and returns the envelope unchanged", async () => {
    const envelope = searchFixture("search_member.json");
    const { fetch, calls } = fakeFetch({
      "/api/search?q=member": { status: 200, body: envelope },
    });
    const client = new ApiClient(fetch);

    const got = await client.search("member");

    expect(calls).toEqual(["/api/search?q=member"]);
    expect(got).toEqual(envelope);
    expect(got.groups[0].frames[0].relation).toBe("Member");
  });

  it("turns a service error body into an ApiError", async () => {
    const body = errorFixture("error_unmappable.json");
    const { fetch } = fakeFetch({
      "/api/search?q=zzzzqqq": { status: 400, body },
    });
    const client = new ApiClient(fetch);

    const failure = await client.search("zzzzqqq").catch((err) => err);

    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("unmappable_keyword");
    expect(failure.status).toBe(400);
    expect(failure.message).toBe(body.message);
  });

  it("reports a network failure without inventing a status", async () => {
    const client = new ApiClient(() => Promise.reject(new TypeError("refused")));

    const failure = await client.search("member").catch((err) => err);

    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("network_error");
    expect(failure.status).toBeNull();
    expect(failure.message).toContain("cannot reach the search service");
  });

  it("falls back to a generic message when the error body is not JSON", async () => {
    const client = new ApiClient(async () => {
      return {
        ok: false,
        status: 500,
        json: async () => {
          throw new SyntaxError("not json");
        },
      } as unknown as Response;
    });

    const failure = await client.search("member").catch((err) => err);

    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("http_error");
    expect(failure.message).toBe("request failed with status 500");
  });

  it("rejects an ok response whose body is unreadable", async () => {
    const client = new ApiClient(async () => jsonResponse(200, null));

    const failure = await client.search("member").catch((err) => err);

    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("bad_body");
  });
});

describe("ApiClient.document", () => {
  it("fetches exactly the href a link carries", async () => {
    const doc = documentFixture("row_city.json");
    const { fetch, calls } = fakeFetch({
      "/api/row/City?Code=BO-3492": { status: 200, body: doc },
    });
    const client = new ApiClient(fetch);

    const got = await client.document("/api/row/City?Code=BO-3492");

    expect(calls).toEqual(["/api/row/City?Code=BO-3492"]);
    expect(got.frames[0].rows).toEqual([["BO-3492", "Illinois"]]);
  });

  it("surfaces an unknown-table error from a dangling href", async () => {
    const body = errorFixture("error_unknown_table.json");
    const { fetch } = fakeFetch({
      "/api/row/Nowhere?X=1": { status: 404, body },
    });
    const client = new ApiClient(fetch);

    const failure = await client.document("/api/row/Nowhere?X=1").catch((err) => err);

    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("unknown_table");
    expect(failure.status).toBe(404);
  });
});
