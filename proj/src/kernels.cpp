#include "qtangent/kernels.hpp"

#include <array>
#include <utility>

namespace qtangent {

namespace {

constexpr std::array<std::pair<Process, std::string_view>, 8> kProcessNames{{
    {Process::QNormal, "qnormal"},
    {Process::QOU, "qou"},
    {Process::QBM, "qbm"},
    {Process::Cauchy, "cauchy"},
    {Process::BianeHalf, "biane_half"},
    {Process::BianeShifted, "biane_shifted"},
    {Process::HalfStableMarginal, "half_stable_marginal"},
    {Process::CauchyMarginal, "cauchy_marginal"},
}};

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view to_string(Process process) {
  for (const auto& [tag, name] : kProcessNames) {
    if (tag == process) return name;
  }
  return "unknown";
}

Process parse_process(std::string_view name) {
  for (const auto& [tag, label] : kProcessNames) {
    if (label == name) return tag;
  }
  raise(ErrorKind::UnknownProcess, "unknown process '" + std::string(name) + "'");
}

Support support_of(Process process, double q, double t) {
  switch (process) {
    case Process::QNormal:
    case Process::QOU: {
      const QParamsd p(q);
      return {p.x_minus, p.x_plus};
    }
    case Process::QBM: {
      const QParamsd p(q);
      if (!(t > 0.0)) raise(ErrorKind::InvalidTime, "q-BM support needs t > 0");
      const double bound = 2.0 * std::sqrt(t / (1.0 - p.q));
      return {-bound, bound};
    }
    case Process::Cauchy:
    case Process::CauchyMarginal:
      return {-kInf, kInf};
    case Process::BianeHalf:
    case Process::HalfStableMarginal:
      if (!(t >= 0.0)) raise(ErrorKind::InvalidTime, "Biane support needs t >= 0");
      return {t * t / 4.0, kInf};
    case Process::BianeShifted:
      return {0.0, kInf};
  }
  raise(ErrorKind::UnknownProcess, "unhandled process tag");
}

double evaluate(const KernelQuery& query, double y2) {
  switch (query.process) {
    case Process::QNormal:
      return qnormal_pdf(QParamsd(query.q), y2);
    case Process::QOU:
      return qou_transition_pdf(QParamsd(query.q), query.t2 - query.t1, query.y1, y2);
    case Process::QBM:
      return qbm_transition_pdf(QParamsd(query.q), query.t1, query.t2, query.y1, y2);
    case Process::Cauchy:
      return cauchy_transition_pdf(query.t1, query.t2, query.y1, y2);
    case Process::BianeHalf:
      return biane_half_pdf(query.t1, query.t2, query.y1, y2);
    case Process::BianeShifted:
      return biane_shifted_pdf(query.t1, query.t2, query.y1, y2);
    case Process::HalfStableMarginal:
      return half_stable_marginal(query.t2, y2);
    case Process::CauchyMarginal:
      return cauchy_marginal(query.t2, y2);
  }
  raise(ErrorKind::UnknownProcess, "unhandled process tag");
}

Support support_of(const KernelQuery& query) {
  switch (query.process) {
    case Process::QNormal:
    case Process::QOU:
      return support_of(query.process, query.q, 0.0);
    default:
      return support_of(query.process, query.q, query.t2);
  }
}

}  // namespace qtangent
