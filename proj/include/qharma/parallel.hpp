/*
 * Copyright 2026 The qharma Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef QHARMA_PARALLEL_HPP_
#define QHARMA_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace qharma {

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
// concurrency). Each index is processed exactly once and independently, so
// any per-index result is identical for every thread count. The first
// exception thrown by a worker is rethrown on the calling thread.
void ParallelFor(std::size_t count, int threads,
                 const std::function<void(std::size_t)>& body);

int ResolveThreadCount(int requested);

}  // namespace qharma

#endif  // QHARMA_PARALLEL_HPP_
