#pragma once

// Text panel format for Dataset (see docs/dataset_format.md):
//
//   # aggcorr-dataset 1
//   # dim <d>
//   # T <T>
//   # seed <u64>
//   # region <id> <origin c1,c2,..> <shape s1,s2,..> <sigma>     (one per region)
//   # inter_corr <a> <b> <r_ab>                                   (a < b, nonzero only)
//   # intra <k_max> <r_min>
//   # noise <sigma_eps> <sigma_e> <eta_0,eta_1,..>
//   # psd_repair <none|project>
//   voxel_id,region_id,coords,y_1,...,y_T
//   0,0,0;0,<T values>
//
// Values are written with 17 significant digits so a round trip is exact.
// Voxel rows follow region order, first lattice axis fastest.

#include <filesystem>
#include <iosfwd>

#include "aggcorr/model.hpp"

namespace aggcorr {

void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// Throws std::runtime_error with the offending line number on malformed input.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace aggcorr
