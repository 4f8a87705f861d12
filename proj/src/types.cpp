#include "commsense/types.hpp"

#include <string>

#include "commsense/errors.hpp"

namespace commsense {

std::vector<double> ChannelImpulseResponse::magnitudes() const {
  std::vector<double> out;
  out.reserve(taps.size());
  for (const cplx& t : taps) out.push_back(std::abs(t));
  return out;
}

Eigen::MatrixXd CaptureDataset::magnitudes() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(records.size()),
                    static_cast<Eigen::Index>(cir_length));
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t k = 0; k < cir_length; ++k) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = std::abs(records[r].taps[k]);
    }
  }
  return m;
}

std::vector<double> CaptureDataset::magnitude_column(std::size_t index) const {
  if (index >= cir_length) {
    throw InvalidArgument("CIR index " + std::to_string(index) + " out of range (Cl = " +
                          std::to_string(cir_length) + ")");
  }
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(std::abs(r.taps[index]));
  return out;
}

std::vector<double> CaptureDataset::pooled_magnitudes() const {
  std::vector<double> out;
  out.reserve(records.size() * cir_length);
  for (const auto& r : records) {
    for (const cplx& t : r.taps) out.push_back(std::abs(t));
  }
  return out;
}

}  // namespace commsense
