// Timing comparison of the serial reference paths against the OpenMP ones.
// The kernels are deterministic, so both paths must agree exactly; any
// mismatch is printed as a failure.

#include <chrono>
#include <cstdio>
#include <functional>

#include "rrdps/attack.hpp"
#include "rrdps/bound.hpp"
#include "rrdps/rates.hpp"

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms,
            bool match) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%-5.2f %s\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms,
              match ? "results match" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("%-28s %13s %13s   %s\n", "kernel", "serial", "openmp",
              "speedup");

  {
    rrdps::OracleRunResult rs, rp;
    const double ts = time_ms([&] {
      rs = rrdps::run_attack_trials(4, 3000, 1, rrdps::Exec::Serial);
    });
    const double tp = time_ms([&] {
      rp = rrdps::run_attack_trials(4, 3000, 1, rrdps::Exec::Parallel);
    });
    bool match = rs.violations == rp.violations &&
                 rs.worst_slack == rp.worst_slack &&
                 rs.scatter.size() == rp.scatter.size();
    for (std::size_t i = 0; match && i < rs.scatter.size(); ++i) {
      match = rs.scatter[i].info == rp.scatter[i].info &&
              rs.scatter[i].error == rp.scatter[i].error;
    }
    report("attack monte carlo (L=4)", ts, tp, match);
  }

  {
    rrdps::SweepRequest req;
    req.channel.dark_rate = 1e-6;
    req.channel.misalignment = 0.015;
    req.packet_lengths = {16, 32};
    for (double loss = 0.0; loss <= 40.0; loss += 4.0) {
      req.loss_grid_db.push_back(loss);
    }
    req.variants = {rrdps::RateVariant::Original, rrdps::RateVariant::Proposed,
                    rrdps::RateVariant::Bb84};
    std::vector<rrdps::SweepRow> rs, rp;
    req.exec = rrdps::Exec::Serial;
    const double ts = time_ms([&] { rs = rrdps::sweep(req); });
    req.exec = rrdps::Exec::Parallel;
    const double tp = time_ms([&] { rp = rrdps::sweep(req); });
    bool match = rs.size() == rp.size();
    for (std::size_t i = 0; match && i < rs.size(); ++i) {
      match = rs[i].point.key_rate == rp[i].point.key_rate &&
              rs[i].point.mu == rp[i].point.mu;
    }
    report("rate sweep (L=16,32)", ts, tp, match);
  }

  {
    rrdps::BoundQuery q;
    q.pulses_per_packet = 32;
    q.photon_number = 8;
    q.mode = rrdps::BoundMode::Constrained;
    q.error_rate = 0.05;
    rrdps::OptimizerOptions opt;
    rrdps::BoundResult bs, bp;
    opt.exec = rrdps::Exec::Serial;
    const double ts = time_ms([&] { bs = rrdps::iae_bound(q, opt); });
    opt.exec = rrdps::Exec::Parallel;
    const double tp = time_ms([&] { bp = rrdps::iae_bound(q, opt); });
    report("constrained bound (L=32,N=8)", ts, tp, bs.iae == bp.iae);
  }

  return 0;
}
