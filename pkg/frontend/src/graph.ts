import type { Graph, GraphNode } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphHandlers {
  onNodeClick: (node: GraphNode) => void;
}

interface Placed {
  node: GraphNode;
  x: number;
  y: number;
}

/**
 * Radial layout for a focused neighborhood: the focus procedure sits in
 * the middle, every neighbor on a ring around it.  Nodes are addressable
 * (data-node-id) so tests and navigation can click them.
 */
export function renderGraph(container: HTMLElement, graph: Graph, handlers: GraphHandlers): void {
  container.textContent = "";
  const width = 640;
  const focusId = graph.focus === null ? null : `proc:${graph.focus}`;
  const others = graph.nodes.filter((n) => n.id !== focusId);
  const ring = Math.max(others.length, 1);
  const radius = Math.min(260, 80 + ring * 14);
  const height = Math.max(360, radius * 2 + 80);
  const cx = width / 2;
  const cy = height / 2;

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "dep-graph");

  const placed = new Map<string, Placed>();
  const focusNode = graph.nodes.find((n) => n.id === focusId);
  if (focusNode) {
    placed.set(focusNode.id, { node: focusNode, x: cx, y: cy });
  }
  others.forEach((node, index) => {
    const angle = (2 * Math.PI * index) / ring - Math.PI / 2;
    placed.set(node.id, {
      node,
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  });

  for (const edge of graph.edges) {
    const from = placed.get(edge.source);
    const to = placed.get(edge.target);
    if (!from || !to) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x));
    line.setAttribute("y1", String(from.y));
    line.setAttribute("x2", String(to.x));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("class", `edge edge-${edge.kind}`);
    svg.append(line);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String((from.x + to.x) / 2));
    label.setAttribute("y", String((from.y + to.y) / 2 - 4));
    label.setAttribute("class", "edge-label");
    label.textContent = edge.kind === "handles" ? `handles ${edge.event ?? ""}` : edge.kind;
    svg.append(label);
  }

  for (const { node, x, y } of placed.values()) {
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", `node node-${node.kind}`);
    group.setAttribute("data-node-id", node.id);
    group.setAttribute("transform", `translate(${x}, ${y})`);
    const shape = document.createElementNS(SVG_NS, node.kind === "procedure" ? "rect" : "ellipse");
    if (node.kind === "procedure") {
      shape.setAttribute("x", "-58");
      shape.setAttribute("y", "-14");
      shape.setAttribute("width", "116");
      shape.setAttribute("height", "28");
      shape.setAttribute("rx", "4");
    } else {
      shape.setAttribute("rx", "62");
      shape.setAttribute("ry", "15");
    }
    group.append(shape);
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("class", "node-label");
    text.setAttribute("text-anchor", "middle");
    text.setAttribute("dy", "4");
    text.textContent = node.label;
    group.append(text);
    group.addEventListener("click", () => handlers.onNodeClick(node));
    svg.append(group);
  }

  container.append(svg);
}
