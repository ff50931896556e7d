import { describe, expect, it } from "vitest";

import { renderEntryForm } from "../src/form.js";
import { deriveFormSchema } from "../src/schema.js";
import { findAll, text, toHtml } from "../src/vdom.js";
import { crystallographyModel, neuroscienceModel } from "./fixtures.js";

describe("renderEntryForm", () => {
  it("renders the protocol form with readonly ID and Name/Description inputs", () => {
    const schema = deriveFormSchema(neuroscienceModel, { schema: "main", table: "Protocol" });
    const form = renderEntryForm(schema);
    const system = findAll(form, (n) => n.attrs["data-system"] === "true");
    expect(system.length).toBe(3); // RID, RCT, RMT
    expect(system[0].attrs.placeholder).toBe("Automatically generated");

    const labels = findAll(form, (n) => n.tag === "label").map(text);
    expect(labels).toContain("* Name");
    expect(labels).toContain("Description");
    expect(text(form)).toContain("* indicates required field");
  });

  it("restricts term dropdowns to canonical vocabulary terms", () => {
    const schema = deriveFormSchema(neuroscienceModel, { schema: "main", table: "Zebrafish" });
    const form = renderEntryForm(schema);
    const [select] = findAll(form, (n) => n.tag === "select");
    const options = findAll(select, (n) => n.tag === "option").map((o) => o.attrs.value);
    expect(options).toEqual(["", "completed", "in-progress"]); // optional term: (none) allowed
  });

  it("submit collects recorded input values", () => {
    const schema = deriveFormSchema(neuroscienceModel, { schema: "main", table: "Protocol" });
    let submitted: Record<string, string | boolean> | null = null;
    const form = renderEntryForm(schema, { onSubmit: (raw) => (submitted = raw) });
    const inputs = findAll(form, (n) => n.tag === "input" && !n.attrs["data-system"]);
    const name = inputs.find((n) => n.attrs.name === "Name")!;
    name.on!.input({ target: { value: "APV Experiments" } });
    const [button] = findAll(form, (n) => n.tag === "button");
    button.on!.click({ preventDefault: () => undefined });
    expect(submitted).toEqual({ Name: "APV Experiments" });
  });

  it("serializes to html for server-side rendering", () => {
    const schema = deriveFormSchema(crystallographyModel, { schema: "xray", table: "Crystal" });
    const html = toHtml(renderEntryForm(schema));
    expect(html).toContain("<form");
    expect(html).toContain('data-table="xray:Crystal"');
    expect(html).toContain('type="datetime-local"');
  });
});
