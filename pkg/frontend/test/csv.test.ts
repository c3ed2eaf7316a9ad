import { describe, expect, it } from "vitest";

import { EmptyInputError, SchemaError, column, parseCsv } from "../src/csv";

const TRACE = `# seed=7
# scheme=fsts
step,t,du_rate,dv_rate,nonlin_iters,inner_iters,wall_ms
1,0.01,0.5,0.4,3,120,12.5
2,0.02,0.45,0.35,3,118,12.1
`;

describe("parseCsv", () => {
  it("reads metadata comments and rows", () => {
    const t = parseCsv(TRACE, "trace.csv");
    expect(t.meta.seed).toBe("7");
    expect(t.meta.scheme).toBe("fsts");
    expect(t.columns).toEqual([
      "step", "t", "du_rate", "dv_rate", "nonlin_iters", "inner_iters", "wall_ms",
    ]);
    expect(t.rows).toHaveLength(2);
    expect(t.rows[0][1]).toBeCloseTo(0.01);
  });

  it("raises EmptyInputError on empty input", () => {
    expect(() => parseCsv("", "empty.csv")).toThrow(EmptyInputError);
    expect(() => parseCsv("# only=comments\n", "empty.csv")).toThrow(EmptyInputError);
  });

  it("raises EmptyInputError for header without rows", () => {
    expect(() => parseCsv("a,b,c\n", "h.csv")).toThrow(EmptyInputError);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2,3\n", "r.csv")).toThrow(SchemaError);
  });
});

describe("column", () => {
  it("extracts by name", () => {
    const t = parseCsv(TRACE, "trace.csv");
    expect(column(t, "du_rate")).toEqual([0.5, 0.45]);
  });

  it("names the missing column in the error", () => {
    const t = parseCsv(TRACE, "trace.csv");
    expect(() => column(t, "E_u")).toThrow(/missing column 'E_u'/);
  });

  it("parses blank alpha fields as NaN", () => {
    const t = parseCsv("level,tau,n,E_u,E_v,alpha_u,alpha_v\n1,0.5,2,1e-3,1e-3,,\n2,0.25,4,2.5e-4,2.5e-4,2.0,2.0\n");
    expect(Number.isNaN(column(t, "alpha_u")[0])).toBe(true);
    expect(column(t, "alpha_u")[1]).toBeCloseTo(2.0);
  });
});
