import { describe, expect, it } from "vitest";

import { buildInsertPayload, deriveFormSchema } from "../src/schema.js";
import { crystallographyModel, neuroscienceModel } from "./fixtures.js";

describe("deriveFormSchema", () => {
  it("derives ordered fields with readonly system columns", () => {
    const schema = deriveFormSchema(neuroscienceModel, { schema: "main", table: "Protocol" });
    expect(schema.fields.map((f) => f.name)).toEqual(["RID", "RCT", "RMT", "Name", "Description"]);
    const rid = schema.fields[0];
    expect(rid.readonly).toBe(true);
    expect(rid.placeholder).toBe("Automatically generated");
    expect(schema.fields[3].required).toBe(true); // Name is not nullable
    expect(schema.fields[4].required).toBe(false);
  });

  it("renders term columns as vocabulary pickers with canonical options", () => {
    const schema = deriveFormSchema(neuroscienceModel, { schema: "main", table: "Zebrafish" });
    const status = schema.fields.find((f) => f.name === "status")!;
    expect(status.widget).toBe("select");
    expect(status.options).toEqual(["completed", "in-progress"]);
  });

  it("keeps the parent RID writable for extension tables", () => {
    const schema = deriveFormSchema(neuroscienceModel, {
      schema: "main",
      table: "Zebrafish_Genotype",
    });
    const rid = schema.fields.find((f) => f.name === "RID")!;
    expect(rid.readonly).toBe(false);
    expect(rid.required).toBe(true);
  });

  it("adapts to a second, completely different model", () => {
    const schema = deriveFormSchema(crystallographyModel, {
      schema: "xray",
      table: "Beamline",
    });
    expect(schema.fields.map((f) => f.name)).toEqual(
      ["RID", "RCT", "RMT", "Label", "energy_kev", "operational"],
    );
    expect(schema.fields.find((f) => f.name === "energy_kev")!.widget).toBe("number");
    expect(schema.fields.find((f) => f.name === "operational")!.widget).toBe("checkbox");
  });

  it("reflects an added column after regeneration, with no code changes", () => {
    const evolved = structuredClone(neuroscienceModel);
    evolved.version += 1;
    evolved.schemas.main.Protocol.columns.push({
      name: "Rank",
      value_type: "float",
      nullable: true,
      vocabulary: null,
      system: false,
    });
    const before = deriveFormSchema(neuroscienceModel, { schema: "main", table: "Protocol" });
    const after = deriveFormSchema(evolved, { schema: "main", table: "Protocol" });
    expect(before.fields.some((f) => f.name === "Rank")).toBe(false);
    expect(after.fields.some((f) => f.name === "Rank")).toBe(true);
    expect(after.modelVersion).toBe(before.modelVersion + 1);
  });
});

describe("buildInsertPayload", () => {
  it("coerces typed values and drops empty optionals", () => {
    const schema = deriveFormSchema(crystallographyModel, {
      schema: "xray",
      table: "Beamline",
    });
    const payload = buildInsertPayload(schema, {
      Label: "BL-21",
      energy_kev: "12.7",
      operational: true,
    });
    expect(payload).toEqual({ Label: "BL-21", energy_kev: 12.7, operational: true });
    const sparse = buildInsertPayload(schema, { Label: "BL-22", energy_kev: "" });
    expect(sparse).toEqual({ Label: "BL-22" });
  });

  it("rejects a missing required field", () => {
    const schema = deriveFormSchema(neuroscienceModel, { schema: "main", table: "Protocol" });
    expect(() => buildInsertPayload(schema, { Description: "d" })).toThrow(/required/);
  });
});
