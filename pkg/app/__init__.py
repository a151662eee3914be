# IRS-aided MIMO outage analysis package
