/**
 * Minimal vector PDF backend: strokes the Scene's grid, frame and series
 * as line paths and sets text in Helvetica.  One page, no compression.
 */

import {
  Scene,
  formatTick,
  project,
  ticks,
} from "./scene";

class ContentStream {
  private parts: string[] = [];

  rgb(c: [number, number, number]): string {
    return `${(c[0] / 255).toFixed(3)} ${(c[1] / 255).toFixed(3)} ${(c[2] / 255).toFixed(3)}`;
  }

  stroke(pts: [number, number][], color: [number, number, number], width = 1): void {
    if (pts.length < 2) return;
    this.parts.push(`${this.rgb(color)} RG ${width} w`);
    this.parts.push(`${pts[0][0].toFixed(2)} ${pts[0][1].toFixed(2)} m`);
    for (const [x, y] of pts.slice(1)) {
      this.parts.push(`${x.toFixed(2)} ${y.toFixed(2)} l`);
    }
    this.parts.push("S");
  }

  text(x: number, y: number, s: string, size = 10): void {
    const esc = s.replace(/\\/g, "\\\\").replace(/\(/g, "\\(").replace(/\)/g, "\\)");
    this.parts.push(
      `BT /F1 ${size} Tf 0 0 0 rg ${x.toFixed(2)} ${y.toFixed(2)} Td (${esc}) Tj ET`,
    );
  }

  toString(): string {
    return this.parts.join("\n");
  }
}

/** Flip pixel coordinates (y down) into PDF coordinates (y up). */
function flip(scene: Scene, p: [number, number]): [number, number] {
  return [p[0], scene.height - p[1]];
}

export function encodePdf(scene: Scene): Buffer {
  const cs = new ContentStream();
  const { margin, width, height } = scene;
  const x0 = margin.left;
  const x1 = width - margin.right;
  const yTop = height - margin.top;
  const yBot = margin.bottom;
  const grey: [number, number, number] = [200, 200, 200];
  const black: [number, number, number] = [0, 0, 0];

  for (const tx of ticks(scene.xScale)) {
    const [px] = project(scene, tx, scene.yScale.min);
    cs.stroke([[px, yBot], [px, yTop]], grey, 0.5);
    cs.text(px - 8, yBot - 14, formatTick(tx), 8);
  }
  for (const ty of ticks(scene.yScale)) {
    const [, pyPix] = project(scene, scene.xScale.min, ty);
    const py = height - pyPix;
    cs.stroke([[x0, py], [x1, py]], grey, 0.5);
    cs.text(8, py - 3, formatTick(ty), 8);
  }
  cs.stroke([[x0, yBot], [x1, yBot], [x1, yTop], [x0, yTop], [x0, yBot]], black, 1);

  for (const s of scene.series) {
    if (s.style === "hline") {
      const [, pyPix] = project(scene, scene.xScale.min, s.y[0]);
      cs.stroke([[x0, height - pyPix], [x1, height - pyPix]], s.color, 1.5);
      continue;
    }
    if (s.style === "bars") {
      for (let i = 0; i < s.x.length; i++) {
        if (!Number.isFinite(s.y[i])) continue;
        const p = flip(scene, project(scene, s.x[i], s.y[i]));
        cs.stroke([[p[0], yBot], p], s.color, 0.8);
      }
      continue;
    }
    const pts: [number, number][] = [];
    for (let i = 0; i < s.x.length; i++) {
      const usable = Number.isFinite(s.y[i]) &&
        (scene.yScale.kind !== "log" || s.y[i] > 0);
      if (usable) pts.push(flip(scene, project(scene, s.x[i], s.y[i])));
    }
    cs.stroke(pts, s.color, 1.2);
  }

  cs.text(x0, height - 20, scene.title, 14);
  cs.text((x0 + x1) / 2 - 20, 16, scene.xLabel, 10);
  cs.text(8, yTop + 10, scene.yLabel, 10);
  let ly = yTop - 14;
  for (const s of scene.series) {
    if (!s.label) continue;
    cs.stroke([[x1 - 120, ly + 3], [x1 - 100, ly + 3]], s.color, 1.5);
    cs.text(x1 - 94, ly, s.label, 9);
    ly -= 13;
  }
  for (const a of scene.annotations) {
    const ax = x0 + a.fx * (x1 - x0);
    const ay = yBot + a.fy * (yTop - yBot);
    cs.text(ax, ay, a.text, 10);
  }

  return assemblePdf(width, height, cs.toString());
}

function assemblePdf(width: number, height: number, content: string): Buffer {
  const objects: string[] = [];
  objects.push("<< /Type /Catalog /Pages 2 0 R >>");
  objects.push("<< /Type /Pages /Kids [3 0 R] /Count 1 >>");
  objects.push(
    `<< /Type /Page /Parent 2 0 R /MediaBox [0 0 ${width} ${height}] ` +
      "/Contents 4 0 R /Resources << /Font << /F1 5 0 R >> >> >>",
  );
  objects.push(
    `<< /Length ${Buffer.byteLength(content, "utf8")} >>\nstream\n${content}\nendstream`,
  );
  objects.push("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>");

  let out = "%PDF-1.4\n";
  const offsets: number[] = [];
  objects.forEach((obj, i) => {
    offsets.push(Buffer.byteLength(out, "utf8"));
    out += `${i + 1} 0 obj\n${obj}\nendobj\n`;
  });
  const xref = Buffer.byteLength(out, "utf8");
  out += `xref\n0 ${objects.length + 1}\n0000000000 65535 f \n`;
  for (const off of offsets) {
    out += `${off.toString().padStart(10, "0")} 00000 n \n`;
  }
  out += `trailer\n<< /Size ${objects.length + 1} /Root 1 0 R >>\n`;
  out += `startxref\n${xref}\n%%EOF\n`;
  return Buffer.from(out, "utf8");
}
