// Scratch probe (not part of the build): MFS accuracy vs offset/reg, kernel sign structure.
#include <cmath>
#include <cstdio>
#include <memory>

#include "bdflow/dtn.hpp"
#include "bdflow/geometry.hpp"

using namespace bdflow;

int main() {
  // 1) MFS vs exact multiplier on the unit circle, N=256, offset 0.6.
  for (double reg : {1e-12, 1e-14, 1e-15}) {
    auto curve = std::make_shared<const BoundaryCurve>(BoundaryCurve::circle(1.0, 256));
    try {
      auto mfs = build_dtn_general(curve, 0.6, reg);
      double worst20 = 0.0;
      for (int k = 0; k <= 20; ++k) {
        for (int ph = 0; ph < (k == 0 ? 1 : 2); ++ph) {
          std::vector<double> f(256);
          for (int i = 0; i < 256; ++i)
            f[i] = ph == 0 ? std::cos(k * curve->theta()[i]) : std::sin(k * curve->theta()[i]);
          auto g = mfs.apply(f);
          double err = 0.0;
          for (int i = 0; i < 256; ++i) err = std::max(err, std::abs(g[i] - k * f[i]));
          worst20 = std::max(worst20, err);
        }
      }
      std::printf("reg=%.0e  k<=20 err=%.3e  sym=%.3e  const=%.3e  psd=%.3e  fit=%.3e\n", reg,
                  worst20, mfs.build_report().symmetry_defect, mfs.build_report().constant_defect,
                  mfs.build_report().psd_defect, mfs.build_report().dirichlet_residual);
    } catch (const std::exception& e) {
      std::printf("reg=%.0e  FAILED: %s\n", reg, e.what());
    }
  }

  // 2) Spectral kernel sign structure (wrong-sign off-diagonal entries?).
  for (int n : {64, 256}) {
    auto curve = std::make_shared<const BoundaryCurve>(BoundaryCurve::circle(1.0, n));
    auto op = build_dtn_circle(curve);
    double worst_offdiag = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) worst_offdiag = std::max(worst_offdiag, op.matrix()(i, j));
    std::printf("N=%d spectral max off-diag entry=%.3e (positive would break monotonicity)\n", n,
                worst_offdiag);
  }

  // 3) MFS on ellipse and star: does the trace fit hold up?
  for (double reg : {1e-12, 1e-14}) {
    try {
      auto ell = std::make_shared<const BoundaryCurve>(BoundaryCurve::ellipse(1.0, 0.5, 256));
      auto op = build_dtn_general(ell, 0.6, reg);
      std::printf("ellipse reg=%.0e: fit=%.3e sym=%.3e const=%.3e psd=%.3e\n", reg,
                  op.build_report().dirichlet_residual, op.build_report().symmetry_defect,
                  op.build_report().constant_defect, op.build_report().psd_defect);
    } catch (const std::exception& e) {
      std::printf("ellipse reg=%.0e FAILED: %s\n", reg, e.what());
    }
    try {
      auto st = std::make_shared<const BoundaryCurve>(BoundaryCurve::star(0.1, 3, 128));
      auto op = build_dtn_general(st, 0.6, reg);
      std::printf("star reg=%.0e: fit=%.3e sym=%.3e const=%.3e psd=%.3e\n", reg,
                  op.build_report().dirichlet_residual, op.build_report().symmetry_defect,
                  op.build_report().constant_defect, op.build_report().psd_defect);
    } catch (const std::exception& e) {
      std::printf("star reg=%.0e FAILED: %s\n", reg, e.what());
    }
  }
  return 0;
}
