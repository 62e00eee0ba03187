// Copyright 2026 The sasr Authors
// Licensed under the Apache License, Version 2.0

int main() { return 0; }
