/** Clickable model diagram: one node per non-vocabulary table, one
 * edge per foreign key or extension link, laid out deterministically
 * on a circle (sorted by qualified name). Clicking a node navigates to
 * that table's browse view. */

import { CatalogModel, allTables, tableRefKey } from "./model.js";
import { BrowseState, emptyBrowseState } from "./urlState.js";
import { VNode, h } from "./vdom.js";

export interface MapNode {
  key: string; // "schema:Table"
  table: string;
  kind: string;
  x: number;
  y: number;
}

export interface MapEdge {
  from: string;
  to: string;
  kind: "foreign-key" | "extension";
}

export interface ModelMap {
  nodes: MapNode[];
  edges: MapEdge[];
}

const RADIUS = 200;
const CENTER = 250;

export function deriveModelMap(model: CatalogModel): ModelMap {
  const entries = allTables(model).filter(([, table]) => table.kind !== "vocabulary");
  const nodes: MapNode[] = entries.map(([ref, table], index) => {
    const angle = (2 * Math.PI * index) / Math.max(entries.length, 1);
    return {
      key: tableRefKey(ref),
      table: table.name,
      kind: table.kind,
      x: Math.round(CENTER + RADIUS * Math.cos(angle)),
      y: Math.round(CENTER + RADIUS * Math.sin(angle)),
    };
  });
  const keys = new Set(nodes.map((n) => n.key));
  const edges: MapEdge[] = [];
  for (const [ref, table] of entries) {
    for (const fk of table.foreign_keys) {
      const to = `${fk.ref_schema}:${fk.ref_table}`;
      if (keys.has(to)) {
        edges.push({ from: tableRefKey(ref), to, kind: "foreign-key" });
      }
    }
    if (table.kind === "extension" && table.extends) {
      edges.push({
        from: tableRefKey(ref),
        to: `${ref.schema}:${table.extends}`,
        kind: "extension",
      });
    }
  }
  edges.sort((a, b) => `${a.from}>${a.to}`.localeCompare(`${b.from}>${b.to}`));
  return { nodes, edges };
}

export interface MapCallbacks {
  onNavigate?: (state: BrowseState) => void;
}

export function renderModelMap(model: CatalogModel, callbacks: MapCallbacks = {}): VNode {
  const map = deriveModelMap(model);
  const byKey = new Map(map.nodes.map((n) => [n.key, n]));
  const edgeLines = map.edges.map((edge) => {
    const from = byKey.get(edge.from)!;
    const to = byKey.get(edge.to)!;
    return h("line", {
      class: `edge edge-${edge.kind}`,
      x1: String(from.x),
      y1: String(from.y),
      x2: String(to.x),
      y2: String(to.y),
      "data-from": edge.from,
      "data-to": edge.to,
    });
  });
  const nodeGroups = map.nodes.map((node) =>
    h(
      "g",
      {
        class: `node node-${node.kind}`,
        transform: `translate(${node.x},${node.y})`,
        "data-table": node.key,
      },
      [
        h("circle", { r: "36" }),
        h("text", { "text-anchor": "middle" }, [node.table]),
      ],
      {
        click: () => callbacks.onNavigate?.(emptyBrowseState(node.key)),
      },
    ),
  );
  return h(
    "svg",
    { class: "model-map", viewBox: "0 0 500 500", "data-model-version": String(model.version) },
    [...edgeLines, ...nodeGroups],
  );
}
