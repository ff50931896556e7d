/** FormSchema: ordered field descriptors derived from the live model.
 * Regenerating after a model change picks up added columns with no
 * code changes anywhere else. */

import {
  CatalogModel,
  ColumnDef,
  TableRef,
  findVocabulary,
  getTable,
} from "./model.js";

export type Widget =
  | "text"
  | "number"
  | "checkbox"
  | "datetime"
  | "identifier"
  | "select"
  | "readonly";

export interface FieldDescriptor {
  name: string;
  label: string;
  valueType: ColumnDef["value_type"];
  widget: Widget;
  required: boolean;
  readonly: boolean;
  /** shown instead of an input for system-managed fields */
  placeholder?: string;
  /** canonical vocabulary terms for term columns */
  options?: string[];
}

export interface FormSchema {
  schema: string;
  table: string;
  kind: string;
  modelVersion: number;
  fields: FieldDescriptor[];
}

const WIDGETS: Record<ColumnDef["value_type"], Widget> = {
  text: "text",
  integer: "number",
  float: "number",
  boolean: "checkbox",
  timestamp: "datetime",
  identifier: "identifier",
  term: "select",
};

function labelFor(name: string): string {
  return name.replace(/_/g, " ");
}

export function deriveFormSchema(model: CatalogModel, ref: TableRef): FormSchema {
  const table = getTable(model, ref);
  if (!table) {
    throw new Error(`no table ${ref.schema}:${ref.table} in model`);
  }
  const fields: FieldDescriptor[] = table.columns.map((col) => {
    // extension rows are keyed by their parent's RID, so that one
    // system column stays writable
    const parentKey = table.kind === "extension" && col.name === "RID";
    if (col.system && !parentKey) {
      return {
        name: col.name,
        label: labelFor(col.name),
        valueType: col.value_type,
        widget: "readonly",
        required: false,
        readonly: true,
        placeholder: "Automatically generated",
      };
    }
    const descriptor: FieldDescriptor = {
      name: col.name,
      label: labelFor(col.name),
      valueType: col.value_type,
      widget: WIDGETS[col.value_type],
      required: parentKey || !col.nullable,
      readonly: false,
    };
    if (col.value_type === "term" && col.vocabulary) {
      const vocabulary = findVocabulary(model, col.vocabulary, ref.schema);
      descriptor.options = (vocabulary?.terms ?? []).map((t) => t.canonical);
    }
    return descriptor;
  });
  return {
    schema: ref.schema,
    table: ref.table,
    kind: table.kind,
    modelVersion: model.version,
    fields,
  };
}

/** Convert raw form input strings into the typed insert payload the
 * service expects. Empty optional inputs are omitted. */
export function buildInsertPayload(
  schema: FormSchema,
  raw: Record<string, string | boolean>,
): Record<string, unknown> {
  const payload: Record<string, unknown> = {};
  for (const field of schema.fields) {
    if (field.readonly) continue;
    const value = raw[field.name];
    if (value === undefined || value === "") {
      if (field.required) {
        throw new Error(`${field.label} is required`);
      }
      continue;
    }
    payload[field.name] = coerce(field, value);
  }
  return payload;
}

function coerce(field: FieldDescriptor, value: string | boolean): unknown {
  if (field.valueType === "boolean") {
    return typeof value === "boolean" ? value : value === "true";
  }
  const text = String(value);
  if (field.valueType === "integer") {
    const parsed = Number.parseInt(text, 10);
    if (!Number.isFinite(parsed)) throw new Error(`${field.label} must be an integer`);
    return parsed;
  }
  if (field.valueType === "float") {
    const parsed = Number.parseFloat(text);
    if (!Number.isFinite(parsed)) throw new Error(`${field.label} must be a number`);
    return parsed;
  }
  return text;
}
