export { ApiError, FairApi } from "./api.js";
export type { LandingData, LandingLink, QueryResultPage, Resolution } from "./api.js";
export { renderEntryForm } from "./form.js";
export { renderLandingPage, renderNotFound } from "./landing.js";
export {
  allTables,
  findVocabulary,
  getTable,
  parseTableRef,
  tableRefKey,
} from "./model.js";
export type { CatalogModel, ColumnDef, ForeignKey, TableDef, TableRef } from "./model.js";
export { deriveModelMap, renderModelMap } from "./modelMap.js";
export { buildInsertPayload, deriveFormSchema } from "./schema.js";
export type { FieldDescriptor, FormSchema } from "./schema.js";
export {
  decodeBrowseState,
  emptyBrowseState,
  encodeBrowseState,
} from "./urlState.js";
export type { BrowseState, Filter } from "./urlState.js";
export { findAll, h, mount, text, toHtml } from "./vdom.js";
export type { VNode } from "./vdom.js";
