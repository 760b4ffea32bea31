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

#include "bld/clustering.hpp"
#include "bld/core.hpp"
#include "bld/evaluation.hpp"
#include "bld/formats.hpp"
#include "bld/groundtruth.hpp"
#include "bld/image_io.hpp"
#include "bld/npl.hpp"
#include "bld/pipeline.hpp"
#include "bld/rng.hpp"
#include "bld/state_estimation.hpp"
#include "bld/superpixels.hpp"
#include "bld/tensor.hpp"
#include "bld/weights.hpp"
