/** A deliberately tiny view layer: renderers build plain node trees
 * that tests can inspect structurally and browsers can turn into real
 * DOM. No framework. */

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: (VNode | string)[];
  on?: Record<string, (event?: unknown) => void>;
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  children: (VNode | string)[] = [],
  on?: Record<string, (event?: unknown) => void>,
): VNode {
  return { tag, attrs, children, on };
}

const VOID_TAGS = new Set(["input", "br", "hr", "img", "meta", "link"]);

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function toHtml(node: VNode | string): string {
  if (typeof node === "string") return escapeHtml(node);
  const attrs = Object.entries(node.attrs)
    .map(([key, value]) => ` ${key}="${escapeHtml(value)}"`)
    .join("");
  if (VOID_TAGS.has(node.tag)) return `<${node.tag}${attrs}>`;
  const children = node.children.map(toHtml).join("");
  return `<${node.tag}${attrs}>${children}</${node.tag}>`;
}

/** Depth-first search helpers for tests and integrations. */
export function findAll(
  node: VNode | string,
  predicate: (node: VNode) => boolean,
): VNode[] {
  if (typeof node === "string") return [];
  const hits = predicate(node) ? [node] : [];
  return hits.concat(...node.children.map((child) => findAll(child, predicate)));
}

export function text(node: VNode | string): string {
  if (typeof node === "string") return node;
  return node.children.map(text).join("");
}

/** Mount into a real DOM when running in a browser. */
export function mount(node: VNode, target: { appendChild(child: unknown): void }): void {
  const doc = (globalThis as { document?: Document }).document;
  if (!doc) throw new Error("mount requires a browser document");
  target.appendChild(materialize(node, doc));
}

function materialize(node: VNode | string, doc: Document): Node {
  if (typeof node === "string") return doc.createTextNode(node);
  const element = doc.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    element.setAttribute(key, value);
  }
  for (const [event, handler] of Object.entries(node.on ?? {})) {
    element.addEventListener(event, handler);
  }
  for (const child of node.children) {
    element.appendChild(materialize(child, doc));
  }
  return element;
}
