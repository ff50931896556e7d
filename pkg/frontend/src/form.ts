/** Entry-form renderer. The form is generated entirely from a
 * FormSchema (which is generated entirely from the live model), so a
 * model change plus reload is all it takes to see new fields. */

import { FieldDescriptor, FormSchema } from "./schema.js";
import { VNode, h } from "./vdom.js";

export interface FormCallbacks {
  onSubmit?: (raw: Record<string, string | boolean>) => void;
}

export function renderEntryForm(schema: FormSchema, callbacks: FormCallbacks = {}): VNode {
  const values: Record<string, string | boolean> = {};
  const rows = schema.fields.map((field) => renderField(schema, field, values));
  return h(
    "form",
    {
      class: "entry-form",
      "data-table": `${schema.schema}:${schema.table}`,
      "data-model-version": String(schema.modelVersion),
    },
    [
      h("h2", {}, [`Create new ${schema.table.replace(/_/g, " ")}`]),
      h("p", { class: "required-hint" }, ["* indicates required field"]),
      ...rows,
      h("button", { type: "submit" }, ["Save"], {
        click: (event) => {
          (event as { preventDefault?: () => void })?.preventDefault?.();
          callbacks.onSubmit?.(values);
        },
      }),
    ],
  );
}

function renderField(
  schema: FormSchema,
  field: FieldDescriptor,
  values: Record<string, string | boolean>,
): VNode {
  const id = `field-${schema.table}-${field.name}`;
  const marker = field.required ? "* " : "";
  const label = h("label", { for: id }, [`${marker}${field.label}`]);
  return h("div", { class: "form-row", "data-field": field.name }, [
    label,
    renderInput(id, field, values),
  ]);
}

function renderInput(
  id: string,
  field: FieldDescriptor,
  values: Record<string, string | boolean>,
): VNode {
  const record = (event: unknown) => {
    const target = (event as { target?: { value?: string; checked?: boolean } })?.target;
    if (!target) return;
    values[field.name] =
      field.widget === "checkbox" ? Boolean(target.checked) : target.value ?? "";
  };
  if (field.readonly) {
    return h("input", {
      id,
      name: field.name,
      type: "text",
      readonly: "readonly",
      placeholder: field.placeholder ?? "",
      "data-system": "true",
    });
  }
  if (field.widget === "select") {
    const options = (field.options ?? []).map((term) =>
      h("option", { value: term }, [term]),
    );
    const head = field.required ? [] : [h("option", { value: "" }, ["(none)"])];
    return h(
      "select",
      { id, name: field.name, ...(field.required ? { required: "required" } : {}) },
      [...head, ...options],
      { change: record },
    );
  }
  const type =
    field.widget === "number" ? "number"
    : field.widget === "checkbox" ? "checkbox"
    : field.widget === "datetime" ? "datetime-local"
    : "text";
  return h(
    "input",
    {
      id,
      name: field.name,
      type,
      ...(field.required ? { required: "required" } : {}),
    },
    [],
    { input: record, change: record },
  );
}
