// Copyright 2026 The Enwar Authors
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


#pragma once

#include "enwar/commands.hpp"
#include "enwar/error.hpp"
#include "enwar/evaluation.hpp"
#include "enwar/generation.hpp"
#include "enwar/geo.hpp"
#include "enwar/http_client.hpp"
#include "enwar/knowledge_base.hpp"
#include "enwar/lidar.hpp"
#include "enwar/scene.hpp"
#include "enwar/textproc.hpp"
