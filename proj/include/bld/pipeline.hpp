// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <vector>

#include "bld/clustering.hpp"
#include "bld/core.hpp"
#include "bld/state_estimation.hpp"
#include "bld/superpixels.hpp"

namespace bld {

struct DetectionResult {
    std::vector<PolyChain> baselines;
    std::vector<SuperPixel> sps;
    std::vector<SpState> states;
    NeighborhoodSystem neighborhood;  // full Delaunay system
    NeighborhoodSystem reduced;       // after orientation/separator/region cuts
    Partition partition;
    std::vector<ClusterMove> moves;
};

/// Stage II end to end: superpixels from the baseline map, state estimation
/// over the Delaunay neighborhood, neighborhood reduction, greedy clustering,
/// and chain extraction. `use_separator` disables the separator cuts (the
/// map's separator plane is then ignored).
inline DetectionResult detect_from_maps(const ConfidenceMaps& maps, const PipelineConfig& cfg,
                                        const std::optional<std::vector<Region>>& regions =
                                            std::nullopt,
                                        bool use_separator = true) {
    cfg.validate();
    DetectionResult result;

    BinaryImage binary = binarize(maps.baseline, cfg.bin_threshold);
    BinaryImage skeleton = skeletonize(binary);
    result.sps = select_superpixels(skeleton, maps.baseline, cfg.min_sp_distance);
    const int n = static_cast<int>(result.sps.size());
    result.partition.assignment.assign(n, -1);
    if (n == 0) return result;

    std::vector<Point> positions(n);
    for (int i = 0; i < n; ++i) positions[i] = result.sps[i].pos;

    result.neighborhood = build_neighborhood(positions);
    result.states = estimate_states(result.sps, result.neighborhood, maps.baseline, cfg);
    result.reduced = reduce_neighborhood(result.neighborhood, result.states, positions,
                                         use_separator ? &maps.separator : nullptr, regions,
                                         cfg);

    auto clustered = greedy_cluster(positions, result.states, result.reduced, maps.baseline, cfg);
    result.partition = std::move(clustered.partition);
    result.moves = std::move(clustered.moves);
    result.baselines =
        baselines_from_partition(result.partition, positions, result.states, cfg);
    return result;
}

} // namespace bld
