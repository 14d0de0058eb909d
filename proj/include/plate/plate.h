// Copyright 2026 The PLATE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PLATE_PLATE_H_
#define PLATE_PLATE_H_

#include "plate/types.h"
#include "plate/dynamics.h"
#include "plate/estimator.h"
#include "plate/schedule.h"
#include "plate/exact.h"
#include "plate/covgraph.h"
#include "plate/qdp.h"
#include "plate/bounds.h"
#include "plate/mhplate.h"
#include "plate/simkit.h"
#include "plate/io.h"

#endif  // PLATE_PLATE_H_
