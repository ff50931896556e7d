/** BrowseState <-> URL query string. The whole browse state is
 * encodable in a URL, so any view is a shareable link. */

export interface Filter {
  column: string;
  op: string;
  value: string;
}

export interface BrowseState {
  table: string; // "schema:Table"
  filters: Filter[];
  facets: string[];
  snapshot: number | null;
  cursor: string | null;
}

export function emptyBrowseState(table: string): BrowseState {
  return { table, filters: [], facets: [], snapshot: null, cursor: null };
}

export function encodeBrowseState(state: BrowseState): string {
  const params = new URLSearchParams();
  params.set("table", state.table);
  for (const filter of state.filters) {
    params.append("filter", `${filter.column}:${filter.op}:${filter.value}`);
  }
  for (const facet of state.facets) {
    params.append("facet", facet);
  }
  if (state.snapshot !== null) params.set("snapshot", String(state.snapshot));
  if (state.cursor !== null) params.set("cursor", state.cursor);
  return params.toString();
}

export function decodeBrowseState(query: string): BrowseState {
  const params = new URLSearchParams(query);
  const table = params.get("table");
  if (!table) throw new Error("browse URL lacks a table");
  const filters: Filter[] = params.getAll("filter").map((item) => {
    const [column, op, ...rest] = item.split(":");
    if (!column || !op || rest.length === 0) {
      throw new Error(`bad filter in URL: ${item}`);
    }
    return { column, op, value: rest.join(":") };
  });
  const snapshot = params.get("snapshot");
  return {
    table,
    filters,
    facets: params.getAll("facet"),
    snapshot: snapshot === null ? null : Number.parseInt(snapshot, 10),
    cursor: params.get("cursor"),
  };
}
