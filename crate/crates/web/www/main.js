import init, { fit_synthetic, lasso_curve, pca_scree } from "./pkg/hitsignal_web.js";

const ops = {
  fit: [fit_synthetic, r => `p1_hat      ${r.p1_hat.toFixed(3)}\n-H          ${r.neg_entropy.toFixed(4)}\naccuracy    ${(100 * r.accuracy).toFixed(1)}%`],
  lasso: [lasso_curve, r => `chosen f    ${r.chosen_fraction.toFixed(2)}\ncv rmse     ${r.cv_rmse.toFixed(5)}\nbaseline    ${r.baseline_rmse.toFixed(5)}\nlasso %     ${r.lasso_pct.toFixed(1)}`],
  pca: [pca_scree, r => `significant ${r.significant_count}\n` + r.eigenvalues.map((v, i) => `PC${i + 1}`.padEnd(12) + v.toFixed(3)).join("\n")],
};

function request(section) {
  const out = {};
  for (const input of section.querySelectorAll("input")) out[input.name] = Number(input.value);
  return JSON.stringify(out);
}

function wire(id) {
  const section = document.getElementById(id);
  const [call, describe] = ops[id];
  const stats = section.querySelector(".stats");
  const plot = section.querySelector(".plot");
  section.querySelector("button").addEventListener("click", () => {
    stats.textContent = "running...";
    stats.classList.remove("err");
    setTimeout(() => {
      const reply = JSON.parse(call(request(section)));
      if (reply.error) {
        stats.textContent = reply.error;
        stats.classList.add("err");
        plot.innerHTML = "";
        return;
      }
      stats.textContent = describe(reply);
      plot.innerHTML = reply.svg;
    }, 0);
  });
}

await init();
Object.keys(ops).forEach(wire);
