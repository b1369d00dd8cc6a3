import init, { traceCorank, partitionMerge, generateInputs } from "./pkg/corank_demo.js";

const $ = (id) => document.getElementById(id);

function keys(text) {
  return text.split(/[\s,]+/).filter((t) => t.length > 0);
}

function cells(values, cls, mark) {
  const row = document.createElement("div");
  row.className = "row";
  values.forEach((v, idx) => {
    const c = document.createElement("span");
    c.className = `cell ${cls(idx)}`;
    if (mark && mark(idx)) c.classList.add("taken");
    c.textContent = v;
    row.appendChild(c);
  });
  return row;
}

function renderTrace() {
  const a = $("a").value, b = $("b").value;
  const total = keys(a).length + keys(b).length;
  $("rank").max = total;
  const rank = Math.min(Number($("rank").value), total);
  $("rank-label").textContent = `${rank} of ${total}`;
  const t = JSON.parse(traceCorank(a, b, rank));
  const out = $("trace");
  out.replaceChildren();

  const p = document.createElement("p");
  p.textContent = `co-ranks (j, k) = (${t.a}, ${t.b}) after ${t.steps.length} iteration(s); ` +
    `worst case ceil(log2(w + 1)) = ${t.bound}, ceil(log2 w) = ${t.log2_width_bound}`;
  out.appendChild(p);
  out.appendChild(cells(keys(a), () => "a", (i) => i < t.a));
  out.appendChild(cells(keys(b), () => "b", (i) => i < t.b));

  const table = document.createElement("table");
  table.innerHTML = "<tr><th>step</th><th>violated</th><th>delta</th><th>j</th><th>k</th><th>j_low</th><th>k_low</th></tr>";
  t.steps.forEach((s, n) => {
    const tr = document.createElement("tr");
    [n + 1, s.violation, s.delta, s.a, s.b, s.a_low, s.b_low].forEach((v) => {
      const td = document.createElement("td");
      td.textContent = v;
      tr.appendChild(td);
    });
    table.appendChild(tr);
  });
  out.appendChild(table);
}

function renderPartition() {
  const a = $("a").value, b = $("b").value;
  const p = Number($("workers").value);
  $("workers-label").textContent = p;
  const plan = JSON.parse(partitionMerge(a, b, p));
  const owner = (range) => (idx) => {
    const w = plan.blocks.findIndex((blk) => idx >= blk[range][0] && idx < blk[range][1]);
    return `w${w % 8}`;
  };
  const out = $("partition");
  out.replaceChildren();
  out.appendChild(cells(keys(a), (i) => `a ${owner("a")(i)}`));
  out.appendChild(cells(keys(b), (i) => `b ${owner("b")(i)}`));
  out.appendChild(document.createElement("hr"));
  out.appendChild(cells(
    plan.merged.map((c) => `${c.key}${c.from_a ? "ᴬ" : "ᴮ"}${c.index}`),
    (i) => `${plan.merged[i].from_a ? "a" : "b"} ${owner("output")(i)}`,
  ));
  const sizes = plan.blocks.map((blk) => blk.output[1] - blk.output[0]);
  const p2 = document.createElement("p");
  p2.textContent = `block sizes: ${sizes.join(", ")}`;
  out.appendChild(p2);
}

function render() {
  try {
    $("error").textContent = "";
    renderTrace();
    renderPartition();
  } catch (e) {
    $("error").textContent = String(e.message ?? e);
  }
}

function regenerate() {
  try {
    const g = JSON.parse(generateInputs($("dist").value, Number($("m").value), Number($("n").value), BigInt($("seed").value)));
    $("a").value = g.a.join(", ");
    $("b").value = g.b.join(", ");
    render();
  } catch (e) {
    $("error").textContent = String(e.message ?? e);
  }
}

await init();
for (const id of ["a", "b", "rank", "workers"]) $(id).addEventListener("input", render);
$("gen").addEventListener("click", regenerate);
render();
