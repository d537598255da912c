#pragma once

#include <cstdio>
#include <string>

#include "owlsim/channel.hpp"
#include "owlsim/scenario.hpp"

namespace owlsim::csv {

/// Scientific notation with 9 significant digits; the string contract for
/// all numeric CSV fields, so emitted files reparse to identical statistics.
inline std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return buf;
}

inline std::string scheme_name(const scenario::SchemeSpec& s) {
  return s.label();
}

/// One row per (sweep value, scheme):
/// param,scheme,groups,mean_user_rate_bps,std,ci95_lo,ci95_hi,sum_rate_bps,trials,failures
inline std::string sweep_csv(const scenario::SweepResult& sweep) {
  std::string out =
      "param,scheme,groups,mean_user_rate_bps,std,ci95_lo,ci95_hi,"
      "sum_rate_bps,trials,failures\n";
  for (const auto& p : sweep.points) {
    out += format_sci(p.param) + "," + scheme_name(p.scheme) + "," +
           std::to_string(p.scheme.groups) + "," +
           format_sci(p.user_rate.mean) + "," +
           format_sci(p.user_rate.stddev) + "," +
           format_sci(p.user_rate.ci95_lo) + "," +
           format_sci(p.user_rate.ci95_hi) + "," +
           format_sci(p.sum_rate.mean) + "," +
           std::to_string(p.user_rate.n) + "," +
           std::to_string(p.user_rate.failures) + "\n";
  }
  return out;
}

/// Raw per-trial rates, written when trials are kept:
/// param,scheme,groups,trial,seed,mean_user_rate_bps,sum_rate_bps
/// Failed trials carry nan rates.
inline std::string trials_csv(const scenario::SweepResult& sweep) {
  std::string out =
      "param,scheme,groups,trial,seed,mean_user_rate_bps,sum_rate_bps\n";
  for (const auto& p : sweep.points) {
    for (std::size_t i = 0; i < p.trial_user_rates.size(); ++i) {
      out += format_sci(p.param) + "," + scheme_name(p.scheme) + "," +
             std::to_string(p.scheme.groups) + "," + std::to_string(i) + "," +
             std::to_string(p.trial_seeds[i]) + "," +
             format_sci(p.trial_user_rates[i]) + "," +
             format_sci(p.trial_sum_rates[i]) + "\n";
    }
  }
  return out;
}

/// Channel dump: user,branch,n0..n{N-1}; branch -1 marks an unserved user.
inline std::string channel_csv(const channel::ChannelMatrix& cm) {
  std::string out = "user,branch";
  for (int n = 0; n < cm.num_elements(); ++n)
    out += ",n" + std::to_string(n);
  out += "\n";
  for (int k = 0; k < cm.num_users(); ++k) {
    out += std::to_string(k) + "," + std::to_string(cm.selected_branch[k]);
    for (int n = 0; n < cm.num_elements(); ++n)
      out += "," + format_sci(cm.h(k, n));
    out += "\n";
  }
  return out;
}

}  // namespace owlsim::csv
