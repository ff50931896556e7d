import { describe, expect, it } from "vitest";

import { BrowseState, decodeBrowseState, emptyBrowseState, encodeBrowseState } from "../src/urlState.js";

describe("browse state URL round trip", () => {
  it("round-trips the empty state", () => {
    const state = emptyBrowseState("main:Protocol");
    expect(decodeBrowseState(encodeBrowseState(state))).toEqual(state);
  });

  it("round-trips a fully loaded state exactly", () => {
    const state: BrowseState = {
      table: "main:Zebrafish",
      filters: [
        { column: "status", op: "=", value: "completed" },
        { column: "Name", op: "contains", value: "zf 7" },
        { column: "protocol", op: "=", value: "SYNAPSE:1-1ACR" },
      ],
      facets: ["status", "protocol"],
      snapshot: 41,
      cursor: "SYNAPSE:AAAA-BBBB-CCCC-DDDD",
    };
    const encoded = encodeBrowseState(state);
    expect(decodeBrowseState(encoded)).toEqual(state);
  });

  it("keeps filter values containing separators intact", () => {
    const state: BrowseState = {
      table: "main:Image",
      filters: [{ column: "url", op: "contains", value: "https://ex.org/a:b:c" }],
      facets: [],
      snapshot: null,
      cursor: null,
    };
    expect(decodeBrowseState(encodeBrowseState(state))).toEqual(state);
  });

  it("rejects URLs without a table", () => {
    expect(() => decodeBrowseState("filter=a:eq:b")).toThrow(/table/);
  });
});
