/** Two deliberately different catalog models in the exact wire shape
 * of GET /v1/catalog/model. The client must render both correctly
 * without containing any of these names itself. */

import { CatalogModel, ColumnDef } from "../src/model.js";

function col(
  name: string,
  value_type: ColumnDef["value_type"] = "text",
  extra: Partial<ColumnDef> = {},
): ColumnDef {
  return { name, value_type, nullable: true, vocabulary: null, system: false, ...extra };
}

function systemCols(): ColumnDef[] {
  return [
    col("RID", "identifier", { nullable: false, system: true }),
    col("RCT", "timestamp", { nullable: false, system: true }),
    col("RMT", "timestamp", { nullable: false, system: true }),
  ];
}

export const neuroscienceModel: CatalogModel = {
  version: 6,
  schemas: {
    main: {
      Status: {
        name: "Status",
        kind: "vocabulary",
        columns: [...systemCols(), col("canonical", "text", { nullable: false }), col("description")],
        keys: [],
        foreign_keys: [],
        extends: null,
        terms: [
          { canonical: "completed", synonyms: ["done"], description: "" },
          { canonical: "in-progress", synonyms: ["running"], description: "" },
        ],
        aliases: [],
      },
      Protocol: {
        name: "Protocol",
        kind: "entity",
        columns: [
          ...systemCols(),
          col("Name", "text", { nullable: false }),
          col("Description"),
        ],
        keys: [],
        foreign_keys: [],
        extends: null,
        terms: [],
        aliases: [],
      },
      Zebrafish: {
        name: "Zebrafish",
        kind: "entity",
        columns: [
          ...systemCols(),
          col("Name"),
          col("protocol", "identifier"),
          col("status", "term", { vocabulary: "Status" }),
        ],
        keys: [],
        foreign_keys: [
          { columns: ["protocol"], ref_schema: "main", ref_table: "Protocol", ref_columns: ["RID"] },
        ],
        extends: null,
        terms: [],
        aliases: [],
      },
      Zebrafish_Genotype: {
        name: "Zebrafish_Genotype",
        kind: "extension",
        columns: [...systemCols(), col("genotype")],
        keys: [["RID"]],
        foreign_keys: [],
        extends: "Zebrafish",
        terms: [],
        aliases: [],
      },
      Image: {
        name: "Image",
        kind: "asset",
        columns: [
          ...systemCols(),
          col("url", "text", { nullable: false }),
          col("checksum", "text", { nullable: false }),
          col("length", "integer", { nullable: false }),
          col("subject", "identifier"),
        ],
        keys: [],
        foreign_keys: [
          { columns: ["subject"], ref_schema: "main", ref_table: "Zebrafish", ref_columns: ["RID"] },
        ],
        extends: null,
        terms: [],
        aliases: [],
      },
      Dataset: {
        name: "Dataset",
        kind: "entity",
        columns: [...systemCols(), col("Title", "text", { nullable: false })],
        keys: [],
        foreign_keys: [],
        extends: null,
        terms: [],
        aliases: [],
      },
    },
  },
};

export const crystallographyModel: CatalogModel = {
  version: 3,
  schemas: {
    xray: {
      Beamline: {
        name: "Beamline",
        kind: "entity",
        columns: [
          ...systemCols(),
          col("Label", "text", { nullable: false }),
          col("energy_kev", "float"),
          col("operational", "boolean"),
        ],
        keys: [],
        foreign_keys: [],
        extends: null,
        terms: [],
        aliases: [["Name", "Label"]],
      },
      Crystal: {
        name: "Crystal",
        kind: "entity",
        columns: [
          ...systemCols(),
          col("compound", "text", { nullable: false }),
          col("grown", "timestamp"),
          col("beamline", "identifier"),
        ],
        keys: [],
        foreign_keys: [
          { columns: ["beamline"], ref_schema: "xray", ref_table: "Beamline", ref_columns: ["RID"] },
        ],
        extends: null,
        terms: [],
        aliases: [],
      },
    },
  },
};
