/*
 * rstar: desk-scale 4D cone-beam CT artifact laboratory
 *
 * Copyright 2026 the rstar developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rstar/checkpoint.hpp"

#include <cstdint>

#include "binio.hpp"

namespace rstar {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'C', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagOptim = 1u;
constexpr std::uint32_t kMaxLevels = 16;
constexpr std::uint32_t kMaxChannels = 1u << 12;
constexpr std::size_t kMaxName = 256;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Network<float>& net,
                     const TrainCursor& cursor, const AdamState<float>* optim) {
  net.validate();
  const std::vector<ParamRef<float>> table = param_table(net);
  if (optim && (optim->m.size() != table.size() || optim->v.size() != table.size()))
    throw DomainError("save_checkpoint: optimizer state does not match network");

  detail::Writer w(path);
  w.raw(kMagic, 4);
  w.scalar<std::uint32_t>(kVersion);
  w.scalar<std::uint32_t>(optim ? kFlagOptim : 0u);
  w.scalar<std::int32_t>(cursor.stage);
  w.scalar<std::int32_t>(cursor.epoch);
  w.scalar<std::int64_t>(cursor.step);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(net.cfg.levels));
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(net.cfg.in_channels));
  w.scalar<std::uint8_t>(net.cfg.residual ? 1 : 0);
  for (int c : net.cfg.channels) w.scalar<std::uint32_t>(static_cast<std::uint32_t>(c));

  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(table.size()));
  std::uint64_t offset = 0;
  for (const auto& p : table) {
    w.scalar<std::uint16_t>(static_cast<std::uint16_t>(p.name.size()));
    w.raw(p.name.data(), p.name.size());
    w.scalar<std::uint8_t>(static_cast<std::uint8_t>(p.shape.size()));
    for (int d : p.shape) w.scalar<std::int32_t>(d);
    w.scalar<std::uint64_t>(offset);
    offset += static_cast<std::uint64_t>(p.data->size()) * sizeof(float);
  }

  std::uint64_t count = 0;
  for (const auto& p : table) count += p.data->size();
  w.scalar<std::uint64_t>(count);
  for (const auto& p : table)
    w.raw(p.data->data(), p.data->size() * sizeof(float));
  if (optim) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (optim->m[i].size() != table[i].data->size())
        throw DomainError("save_checkpoint: moment shape mismatch at " +
                          table[i].name);
      w.raw(optim->m[i].data(), optim->m[i].size() * sizeof(float));
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (optim->v[i].size() != table[i].data->size())
        throw DomainError("save_checkpoint: moment shape mismatch at " +
                          table[i].name);
      w.raw(optim->v[i].data(), optim->v[i].size() * sizeof(float));
    }
  }
  w.close();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  detail::Reader r(path);
  r.expect_magic(kMagic);
  if (r.scalar<std::uint32_t>() != kVersion)
    throw IntegrityError("unsupported checkpoint version in " + r.path());
  const std::uint32_t flags = r.scalar<std::uint32_t>();
  if (flags & ~kFlagOptim)
    throw IntegrityError("unknown flag bits in " + r.path());

  Checkpoint ck;
  ck.cursor.stage = r.scalar<std::int32_t>();
  ck.cursor.epoch = r.scalar<std::int32_t>();
  ck.cursor.step = r.scalar<std::int64_t>();

  NetworkConfig cfg;
  const std::uint32_t levels = r.scalar<std::uint32_t>();
  if (levels < 1 || levels > kMaxLevels)
    throw IntegrityError("implausible level count in " + r.path());
  cfg.levels = static_cast<int>(levels);
  const std::uint32_t cin = r.scalar<std::uint32_t>();
  if (cin < 1 || cin > kMaxChannels)
    throw IntegrityError("implausible input channel count in " + r.path());
  cfg.in_channels = static_cast<int>(cin);
  cfg.residual = r.scalar<std::uint8_t>() != 0;
  cfg.channels.clear();
  for (std::uint32_t l = 0; l < levels; ++l) {
    const std::uint32_t c = r.scalar<std::uint32_t>();
    if (c < 1 || c > kMaxChannels)
      throw IntegrityError("implausible channel count in " + r.path());
    cfg.channels.push_back(static_cast<int>(c));
  }

  // Rebuild the architecture, then overwrite every parameter from the file.
  Rng scratch(0);
  ck.net = build_network<float>(cfg, scratch);
  std::vector<ParamRef<float>> table = param_table(ck.net);

  const std::uint32_t n_entries = r.scalar<std::uint32_t>();
  if (n_entries != table.size())
    throw IntegrityError("parameter table size mismatch in " + r.path());
  std::uint64_t offset = 0;
  for (const auto& p : table) {
    const std::uint16_t len = r.scalar<std::uint16_t>();
    if (len == 0 || len > kMaxName)
      throw IntegrityError("implausible layer name in " + r.path());
    std::string name(len, '\0');
    r.raw(name.data(), len);
    if (name != p.name)
      throw IntegrityError("unexpected layer " + name + " in " + r.path() +
                           " (wanted " + p.name + ")");
    const std::uint8_t nd = r.scalar<std::uint8_t>();
    if (nd != p.shape.size())
      throw IntegrityError("rank mismatch for " + name + " in " + r.path());
    std::size_t elems = 1;
    for (std::uint8_t d = 0; d < nd; ++d) {
      const std::int32_t e = r.scalar<std::int32_t>();
      if (e != p.shape[d])
        throw IntegrityError("shape mismatch for " + name + " in " + r.path());
      elems *= static_cast<std::size_t>(e);
    }
    if (elems != p.data->size())
      throw IntegrityError("element count mismatch for " + name + " in " +
                           r.path());
    if (r.scalar<std::uint64_t>() != offset)
      throw IntegrityError("non-contiguous data offset for " + name + " in " +
                           r.path());
    offset += elems * sizeof(float);
  }

  std::uint64_t count = 0;
  for (const auto& p : table) count += p.data->size();
  if (r.scalar<std::uint64_t>() != count)
    throw IntegrityError("value count mismatch in " + r.path());
  for (auto& p : table) r.raw(p.data->data(), p.data->size() * sizeof(float));

  if (flags & kFlagOptim) {
    ck.has_optim = true;
    adam_init(ck.optim, table);
    ck.optim.step = ck.cursor.step;
    for (std::size_t i = 0; i < table.size(); ++i)
      r.raw(ck.optim.m[i].data(), ck.optim.m[i].size() * sizeof(float));
    for (std::size_t i = 0; i < table.size(); ++i)
      r.raw(ck.optim.v[i].data(), ck.optim.v[i].size() * sizeof(float));
  }
  r.expect_eof();
  ck.net.validate();
  return ck;
}

}  // namespace rstar
