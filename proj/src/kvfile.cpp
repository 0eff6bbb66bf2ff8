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
#include "vcell/kvfile.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vcell {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& source_name) {
    KeyValueFile kv;
    kv.source_ = source_name;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(source_name + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error(source_name + ":" + std::to_string(lineno) + ": empty key");
        }
        if (kv.entries_.contains(key)) {
            throw std::runtime_error(source_name + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        kv.entries_[key] = std::move(value);
        kv.line_of_[key] = lineno;
    }
    return kv;
}

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in, "<string>");
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file '" + path + "'");
    }
    return parse(in, path);
}

void KeyValueFile::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

std::string KeyValueFile::where(const std::string& key) const {
    const auto it = line_of_.find(key);
    if (it == line_of_.end()) {
        return source_ + ": key '" + key + "'";
    }
    return source_ + ":" + std::to_string(it->second) + ": key '" + key + "'";
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    used_[key] = true;
    return it->second;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) {
        return fallback;
    }
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (pos != v->size()) {
            throw std::invalid_argument("trailing characters");
        }
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error(where(key) + ": not a number: '" + *v + "'");
    }
}

std::int64_t KeyValueFile::get_int(const std::string& key, std::int64_t fallback) const {
    const auto v = get(key);
    if (!v) {
        return fallback;
    }
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
        throw std::runtime_error(where(key) + ": not an integer: '" + *v + "'");
    }
    return out;
}

std::uint64_t KeyValueFile::get_uint64(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) {
        return fallback;
    }
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
        throw std::runtime_error(where(key) + ": not an unsigned integer: '" + *v + "'");
    }
    return out;
}

std::vector<std::string> KeyValueFile::get_list(const std::string& key,
                                                const std::vector<std::string>& fallback) const {
    const auto v = get(key);
    if (!v) {
        return fallback;
    }
    std::vector<std::string> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::vector<std::string> KeyValueFile::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
        if (!used_.contains(k)) {
            out.push_back(k);
        }
    }
    return out;
}

void KeyValueFile::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) {
        out << k << " = " << v << '\n';
    }
}

}  // namespace vcell
