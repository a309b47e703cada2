// Payload shapes of the three server endpoints.

export type Meta = {
  format_version: number;
  counts: { nodes: number; edges: number; partitions: number; crossing_edges: number };
  bbox: { x0: number; y0: number; x1: number; y1: number };
  levels: number[];
  max_items: number;
};

export type NodeOut = {
  id: number;
  x: number;
  y: number;
  label: string;
  partition: number;
};

export type EdgeOut = {
  id: number;
  src: number;
  dst: number;
  label: string | null;
};

export type SuperNodeOut = {
  id: number;
  x: number;
  y: number;
  count: number;
};

export type SuperEdgeOut = {
  id: number;
  a: number;
  b: number;
  weight: number;
};

export type WindowResponse = {
  level: number;
  window: { x0: number; y0: number; x1: number; y1: number };
  truncated: boolean;
  outside_node_ids: number[];
  nodes?: NodeOut[];
  edges?: EdgeOut[];
  supernodes?: SuperNodeOut[];
  superedges?: SuperEdgeOut[];
};

export type SearchHit = {
  id: number;
  label: string;
  x: number;
  y: number;
  partition: number;
};

export type SearchResponse = { results: SearchHit[] };

export type WorldWindowParams = {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  level: number;
};
