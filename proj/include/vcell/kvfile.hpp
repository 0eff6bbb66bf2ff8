/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The vcell authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vcell {

/// Flat `key = value` text configuration.
///
/// One entry per line; `#` starts a comment; blank lines are ignored; keys
/// are unique. Values are kept as raw strings and converted on access, so a
/// malformed value is reported with its key and line number.
class KeyValueFile {
  public:
    static KeyValueFile parse(std::istream& in, const std::string& source_name = "<stream>");
    static KeyValueFile parse_string(const std::string& text);
    static KeyValueFile load(const std::string& path);

    void set(const std::string& key, std::string value);
    bool contains(const std::string& key) const { return entries_.contains(key); }

    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
    // Comma separated list; empty entries are dropped.
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

    /// Keys present in the file but never read through a getter.
    std::vector<std::string> unused_keys() const;

    void write(std::ostream& out) const;
    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::string where(const std::string& key) const;

    std::string source_;
    std::map<std::string, std::string> entries_;
    std::map<std::string, int> line_of_;
    mutable std::map<std::string, bool> used_;
};

}  // namespace vcell
