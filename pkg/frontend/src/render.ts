// Top-down 2D view of the scene snapshot. buildRenderModel is pure so tests
// can assert the rendered set matches the snapshot without a canvas.

import { Snapshot } from "./protocol.js";

export interface RenderItem {
  id: number;
  shape: string;
  color: string;
  x: number; // canvas coords
  y: number;
  r: number;
  selected: boolean;
  held: boolean;
}

export interface RenderModel {
  items: RenderItem[];
  box: { x: number; y: number; w: number; h: number };
  anchor: { x: number; y: number };
  pile: { x: number; y: number; r: number };
  scale: number;
}

const PADDING = 0.6; // meters of margin around the world bounds

export function buildRenderModel(
  snapshot: Snapshot,
  width: number,
  height: number,
): RenderModel {
  let minX = snapshot.anchor[0] - 1.5;
  let maxX = snapshot.box.center[0] + 1.0;
  let minY = -1.5;
  let maxY = 1.5;
  for (const o of snapshot.objects) {
    minX = Math.min(minX, o.pos[0]);
    maxX = Math.max(maxX, o.pos[0]);
    minY = Math.min(minY, o.pos[1]);
    maxY = Math.max(maxY, o.pos[1]);
  }
  minX -= PADDING;
  maxX += PADDING;
  minY -= PADDING;
  maxY += PADDING;
  const scale = Math.min(width / (maxX - minX), height / (maxY - minY));
  const toX = (wx: number) => (wx - minX) * scale;
  const toY = (wy: number) => height - (wy - minY) * scale; // +y is up

  return {
    items: snapshot.objects.map((o) => ({
      id: o.id,
      shape: o.shape,
      color: o.color,
      x: toX(o.pos[0]),
      y: toY(o.pos[1]),
      r: Math.max(3, 0.05 * scale),
      selected: o.selected,
      held: o.held,
    })),
    box: {
      x: toX(snapshot.box.center[0] - snapshot.box.size[0] / 2),
      y: toY(snapshot.box.center[1] + snapshot.box.size[1] / 2),
      w: snapshot.box.size[0] * scale,
      h: snapshot.box.size[1] * scale,
    },
    anchor: { x: toX(snapshot.anchor[0]), y: toY(snapshot.anchor[1]) },
    pile: { x: toX(snapshot.pile[0]), y: toY(snapshot.pile[1]), r: 0.5 * scale },
    scale,
  };
}

const CSS_COLORS: Record<string, string> = {
  red: "#e5484d",
  green: "#46a758",
  blue: "#3e63dd",
  yellow: "#f5d90a",
  orange: "#f76b15",
  purple: "#8e4ec6",
  black: "#3a3a3a",
  white: "#f0f0f0",
  gray: "#8d8d8d",
};

export function drawScene(
  ctx: CanvasRenderingContext2D,
  snapshot: Snapshot,
  width: number,
  height: number,
): void {
  const model = buildRenderModel(snapshot, width, height);
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, width, height);

  // pile extent
  ctx.strokeStyle = "#2a2f36";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.arc(model.pile.x, model.pile.y, model.pile.r, 0, Math.PI * 2);
  ctx.stroke();

  // target box
  ctx.strokeStyle = "#5b6572";
  ctx.strokeRect(model.box.x, model.box.y, model.box.w, model.box.h);
  ctx.setLineDash([]);

  // pattern anchor cross
  ctx.strokeStyle = "#c25d5d";
  ctx.beginPath();
  ctx.moveTo(model.anchor.x - 6, model.anchor.y);
  ctx.lineTo(model.anchor.x + 6, model.anchor.y);
  ctx.moveTo(model.anchor.x, model.anchor.y - 6);
  ctx.lineTo(model.anchor.x, model.anchor.y + 6);
  ctx.stroke();

  for (const item of model.items) {
    ctx.fillStyle = CSS_COLORS[item.color] ?? "#cccccc";
    drawShape(ctx, item);
    if (item.selected) {
      ctx.strokeStyle = "#4cc2ff";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(item.x, item.y, item.r + 3, 0, Math.PI * 2);
      ctx.stroke();
      ctx.lineWidth = 1;
    }
    if (item.held) {
      // elevation marker: small upward tick above the object
      ctx.strokeStyle = "#ffd166";
      ctx.beginPath();
      ctx.moveTo(item.x, item.y - item.r - 8);
      ctx.lineTo(item.x, item.y - item.r - 2);
      ctx.stroke();
    }
  }
}

function drawShape(ctx: CanvasRenderingContext2D, item: RenderItem): void {
  const { x, y, r } = item;
  ctx.beginPath();
  switch (item.shape) {
    case "cube":
      ctx.fillRect(x - r, y - r, 2 * r, 2 * r);
      return;
    case "pyramid":
      ctx.moveTo(x, y - r);
      ctx.lineTo(x + r, y + r);
      ctx.lineTo(x - r, y + r);
      ctx.closePath();
      ctx.fill();
      return;
    case "cylinder":
      ctx.fillRect(x - r * 0.7, y - r, 1.4 * r, 2 * r);
      return;
    case "hemisphere":
      ctx.arc(x, y + r / 2, r, Math.PI, 0);
      ctx.closePath();
      ctx.fill();
      return;
    default: // sphere
      ctx.arc(x, y, r, 0, Math.PI * 2);
      ctx.fill();
  }
}
