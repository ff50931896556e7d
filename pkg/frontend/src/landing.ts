/** Record landing page: the publication view where a cited dataset
 * lists every linked record as a hyperlink into the catalog. */

import { LandingData } from "./api.js";
import { VNode, h } from "./vdom.js";

export function renderLandingPage(data: LandingData): VNode {
  const { resolution, links } = data;
  const fields = Object.entries(resolution.record)
    .filter(([, value]) => value !== null && typeof value !== "object")
    .map(([key, value]) =>
      h("tr", { "data-field": key }, [
        h("th", {}, [key]),
        h("td", {}, [String(value)]),
      ]),
    );
  return h("article", { class: "landing", "data-rid": resolution.rid }, [
    h("h1", {}, [`${resolution.table} ${resolution.rid}`]),
    h("p", { class: "citation" }, [
      "Cite as: ",
      h("a", { href: resolution.citation }, [resolution.citation]),
    ]),
    h("table", { class: "record-fields" }, fields),
    h("h2", {}, ["Linked data"]),
    links.length === 0
      ? h("p", { class: "no-links" }, ["No linked records."])
      : h(
          "ul",
          { class: "links" },
          links.map((link) =>
            h("li", { "data-rid": link.rid }, [
              h("a", { href: link.citation, class: "landing-link" }, [link.label]),
            ]),
          ),
        ),
  ]);
}

export function renderNotFound(rid: string): VNode {
  return h("article", { class: "landing not-found" }, [
    h("h1", {}, ["Not found"]),
    h("p", {}, [`No record ${rid} exists in this catalog.`]),
  ]);
}
