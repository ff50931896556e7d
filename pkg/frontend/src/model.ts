/** Wire types for GET /v1/catalog/model. Nothing in the client names a
 * concrete table or column: everything downstream derives from these. */

export interface ColumnDef {
  name: string;
  value_type: "text" | "integer" | "float" | "timestamp" | "boolean" | "identifier" | "term";
  nullable: boolean;
  vocabulary: string | null;
  system: boolean;
}

export interface ForeignKey {
  columns: string[];
  ref_schema: string;
  ref_table: string;
  ref_columns: string[];
}

export interface VocabularyTerm {
  canonical: string;
  synonyms: string[];
  description: string;
}

export interface TableDef {
  name: string;
  kind: "entity" | "asset" | "vocabulary" | "extension";
  columns: ColumnDef[];
  keys: string[][];
  foreign_keys: ForeignKey[];
  extends: string | null;
  terms: VocabularyTerm[];
  aliases: [string, string][];
}

export interface CatalogModel {
  version: number;
  schemas: Record<string, Record<string, TableDef>>;
}

export interface TableRef {
  schema: string;
  table: string;
}

export function tableRefKey(ref: TableRef): string {
  return `${ref.schema}:${ref.table}`;
}

export function parseTableRef(text: string, defaultSchema = "main"): TableRef {
  const idx = text.indexOf(":");
  if (idx < 0) return { schema: defaultSchema, table: text };
  return { schema: text.slice(0, idx), table: text.slice(idx + 1) };
}

export function getTable(model: CatalogModel, ref: TableRef): TableDef | undefined {
  return model.schemas[ref.schema]?.[ref.table];
}

export function allTables(model: CatalogModel): [TableRef, TableDef][] {
  const out: [TableRef, TableDef][] = [];
  for (const schema of Object.keys(model.schemas).sort()) {
    for (const table of Object.keys(model.schemas[schema]).sort()) {
      out.push([{ schema, table }, model.schemas[schema][table]]);
    }
  }
  return out;
}

/** Find a vocabulary table by name, preferring the given schema. */
export function findVocabulary(
  model: CatalogModel,
  name: string,
  schema?: string,
): TableDef | undefined {
  if (schema) {
    const local = model.schemas[schema]?.[name];
    if (local && local.kind === "vocabulary") return local;
  }
  for (const [, table] of allTables(model)) {
    if (table.name === name && table.kind === "vocabulary") return table;
  }
  return undefined;
}
