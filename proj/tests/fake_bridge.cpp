// Copyright 2026 The TrojanScan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Usage: fake_bridge MODE [CLASSES]   or   fake_bridge synthetic SPEC.json

#include <cstdio>
#include <iostream>
#include <string>

#include "fake_bridge.hpp"

int main(int argc, char **argv) {
  if (argc < 2) {
    std::cerr << "usage: fake_bridge MODE [CLASSES | SPEC]\n";
    return 2;
  }
  const std::string mode = argv[1];
  try {
    if (mode == "synthetic") {
      if (argc < 3) return 2;
      trojanscan::testing::FakeBridge(mode, 0, argv[2]).serve(stdin, stdout);
    } else {
      const std::size_t classes = argc > 2 ? std::stoul(argv[2]) : 5;
      trojanscan::testing::FakeBridge(mode, classes).serve(stdin, stdout);
    }
  } catch (const std::exception &e) {
    std::cerr << "fake_bridge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
