/// @file trrom.hpp
/// @brief Umbrella header for the ROM laboratory.

#pragma once

#include "trrom/cli.hpp"
#include "trrom/config.hpp"
#include "trrom/field_ops.hpp"
#include "trrom/fom.hpp"
#include "trrom/grid.hpp"
#include "trrom/io.hpp"
#include "trrom/pod.hpp"
#include "trrom/rom_ops.hpp"
#include "trrom/study.hpp"
#include "trrom/tr_rom.hpp"
