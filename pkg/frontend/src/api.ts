/** Typed client for the /v1 catalog service. The web client consumes
 * only these public routes; there are no private endpoints. */

import { CatalogModel, TableRef, allTables, getTable } from "./model.js";

export class ApiError extends Error {
  constructor(
    public code: string,
    public detail: string,
    public status: number,
  ) {
    super(`${code}: ${detail}`);
  }
}

export interface QueryResultPage {
  records: Record<string, unknown>[];
  facets: Record<string, Record<string, number>>;
  snapshot: number;
  next_cursor: string | null;
}

export interface Resolution {
  rid: string;
  table: string;
  citation: string;
  record: Record<string, unknown>;
}

export interface LandingLink {
  rid: string;
  table: string;
  citation: string;
  label: string;
}

export interface LandingData {
  resolution: Resolution;
  links: LandingLink[];
}

export interface QueryOptions {
  filters?: { column: string; op: string; value: string }[];
  facets?: string[];
  snapshot?: number | null;
  limit?: number;
  cursor?: string | null;
}

export class FairApi {
  constructor(
    private baseUrl: string,
    private token?: string,
    private fetchImpl: typeof fetch = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async call(method: string, path: string, body?: unknown): Promise<unknown> {
    const headers: Record<string, string> = { Accept: "application/json" };
    if (this.token) headers.Authorization = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const err = payload as { code?: string; detail?: string };
      throw new ApiError(err.code ?? "HttpError", err.detail ?? "", response.status);
    }
    return payload;
  }

  async health(): Promise<{ status: string; version: string }> {
    return (await this.call("GET", "/healthz")) as { status: string; version: string };
  }

  async model(): Promise<CatalogModel> {
    return (await this.call("GET", "/v1/catalog/model")) as CatalogModel;
  }

  async insert(
    ref: TableRef,
    values: Record<string, unknown>,
  ): Promise<Record<string, unknown>> {
    return (await this.call(
      "POST",
      `/v1/catalog/entity/${encodeURIComponent(ref.schema)}/${encodeURIComponent(ref.table)}`,
      values,
    )) as Record<string, unknown>;
  }

  async update(
    rid: string,
    values: Record<string, unknown>,
    readRmt?: string,
  ): Promise<Record<string, unknown>> {
    // optimistic concurrency: send the RMT we read; a mismatch surfaces
    // as the server's regular error and becomes a conflict prompt
    const body: Record<string, unknown> = { values };
    if (readRmt !== undefined) body.expected_rmt = readRmt;
    return (await this.call("PATCH", `/v1/catalog/entity/${rid}`, body)) as Record<
      string,
      unknown
    >;
  }

  async entity(rid: string): Promise<Record<string, unknown>> {
    return (await this.call("GET", `/v1/catalog/entity/${rid}`)) as Record<string, unknown>;
  }

  async query(path: string, options: QueryOptions = {}): Promise<QueryResultPage> {
    const params = new URLSearchParams();
    params.set("path", path);
    for (const filter of options.filters ?? []) {
      params.append("filter", `${filter.column}:${filter.op}:${filter.value}`);
    }
    for (const facet of options.facets ?? []) params.append("facet", facet);
    if (options.snapshot != null) params.set("snapshot", String(options.snapshot));
    if (options.limit != null) params.set("limit", String(options.limit));
    if (options.cursor) params.set("cursor", options.cursor);
    return (await this.call("GET", `/v1/catalog/query?${params}`)) as QueryResultPage;
  }

  async resolveRid(rid: string): Promise<Resolution> {
    return (await this.call("GET", `/v1/catalog/resolve/${rid}`)) as Resolution;
  }

  /** Everything the landing page needs: the record itself plus all
   * records that reference it through the model's foreign keys,
   * discovered from the model rather than hardcoded. */
  async landingData(rid: string): Promise<LandingData> {
    const resolution = await this.resolveRid(rid);
    const model = await this.model();
    const links: LandingLink[] = [];
    for (const [ref, table] of allTables(model)) {
      for (const fk of table.foreign_keys) {
        const target = getTable(model, { schema: fk.ref_schema, table: fk.ref_table });
        if (!target || fk.ref_table !== resolution.table) continue;
        if (!fk.ref_columns.every((c) => c === "RID")) continue;
        const page = await this.query(`${ref.schema}:${ref.table}`, {
          filters: fk.columns.map((column) => ({ column, op: "=", value: rid })),
        });
        for (const record of page.records) {
          const linkedRid = String(record.RID);
          links.push({
            rid: linkedRid,
            table: ref.table,
            citation: `/v1/catalog/entity/${linkedRid}`,
            label: pickLabel(record, ref.table, linkedRid),
          });
        }
      }
    }
    links.sort((a, b) => a.rid.localeCompare(b.rid));
    return { resolution, links };
  }
}

function pickLabel(
  record: Record<string, unknown>,
  table: string,
  rid: string,
): string {
  for (const [key, value] of Object.entries(record)) {
    if (["RID", "RCT", "RMT"].includes(key)) continue;
    if (typeof value === "string" && value) return `${table}: ${value}`;
  }
  return `${table}: ${rid}`;
}
