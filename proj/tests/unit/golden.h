// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "lhe/common/bytes.h"

namespace lhe::testing {

inline std::string data_path(const std::string& name) { return std::string(LHE_TEST_DATA_DIR) + "/" + name; }

// Compares bytes with a checked-in golden file. Set LHE_UPDATE_GOLDEN=1 to
// rewrite the file instead.
inline void expect_golden(const std::string& name, const std::vector<std::uint8_t>& bytes) {
  const std::string path = data_path(name);
  if (std::getenv("LHE_UPDATE_GOLDEN") != nullptr) {
    write_file(path, bytes);
    return;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << "missing golden file " << path;
  const auto want = read_file(path);
  ASSERT_EQ(bytes.size(), want.size()) << name;
  EXPECT_TRUE(bytes == want) << "golden mismatch: " << name;
}

}  // namespace lhe::testing
