# Result-table export and side-file I/O
